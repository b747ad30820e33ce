#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/error.hpp"
#include "divergelex/random.hpp"

namespace divergelex {

// Vocabulary plus dense row-major input and output (context) matrices.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  // `output` may be empty when the context matrix is not retained.
  EmbeddingSpace(Vocabulary vocab, std::size_t dimension, std::vector<double> input,
                 std::vector<double> output, std::string tag)
      : vocab_(std::move(vocab)),
        dimension_(dimension),
        input_(std::move(input)),
        output_(std::move(output)),
        tag_(std::move(tag)) {
    if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
    if (input_.size() != vocab_.size() * dimension_) {
      throw DataError("input matrix has " + std::to_string(input_.size()) + " entries, expected " +
                      std::to_string(vocab_.size() * dimension_));
    }
    if (!output_.empty() && output_.size() != input_.size()) {
      throw DataError("output matrix shape does not match input matrix");
    }
    auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(input_.begin(), input_.end(), finite) ||
        !std::all_of(output_.begin(), output_.end(), finite)) {
      throw DataError("embedding matrix contains non-finite entries");
    }
  }

  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& tag() const noexcept { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  std::span<const double> vector(std::size_t index) const {
    return std::span<const double>(input_).subspan(index * dimension_, dimension_);
  }
  std::span<const double> vector(std::string_view word) const { return vector(vocab_.index_of(word)); }

  std::span<const double> output_vector(std::size_t index) const {
    return std::span<const double>(output_).subspan(index * dimension_, dimension_);
  }

  bool has_output() const noexcept { return !output_.empty(); }
  const std::vector<double>& input_matrix() const noexcept { return input_; }
  const std::vector<double>& output_matrix() const noexcept { return output_; }

 private:
  Vocabulary vocab_;
  std::size_t dimension_ = 0;
  std::vector<double> input_;
  std::vector<double> output_;
  std::string tag_;
};

struct Neighbor {
  std::string token;
  double similarity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// u.v / (|u||v|), clamped to [-1, 1].
inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ConfigError("cosine similarity needs vectors of equal dimension");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ZeroVectorError();
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

inline bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.token < b.token;
}

// Top-n tokens by cosine similarity to `word`, excluding the word itself.
// Ordered by descending similarity, then token. Candidates with an all-zero
// vector have no defined similarity and are skipped.
inline std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, std::string_view word,
                                               std::size_t n) {
  if (n == 0) throw ConfigError("neighbor count must be positive");
  const std::size_t query = space.vocab().index_of(word);
  const auto qv = space.vector(query);
  if (std::all_of(qv.begin(), qv.end(), [](double x) { return x == 0.0; })) throw ZeroVectorError();

  struct Scored {
    double sim;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i == query) continue;
    const auto cv = space.vector(i);
    if (std::all_of(cv.begin(), cv.end(), [](double x) { return x == 0.0; })) continue;
    scored.push_back({cosine_similarity(qv, cv), i});
  }
  const auto& vocab = space.vocab();
  auto before = [&vocab](const Scored& a, const Scored& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return vocab.token(a.index) < vocab.token(b.index);
  };
  const std::size_t k = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), before);

  std::vector<Neighbor> result;
  result.reserve(k);
  for (std::size_t i = 0; i < k; ++i) result.push_back({vocab.token(scored[i].index), scored[i].sim});
  return result;
}

// P(t) proportional to count(t)^power.
inline std::vector<double> negative_distribution(const Vocabulary& vocab, double power) {
  if (!(power >= 0.0)) throw ConfigError("unigram power must be non-negative");
  if (vocab.empty()) throw EmptyVocabularyError();
  std::vector<double> p(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    p[i] = std::pow(static_cast<double>(vocab.count(i)), power);
  }
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(z > 0.0)) throw DataError("negative sampling distribution has zero mass");
  for (auto& x : p) x /= z;
  return p;
}

// Inverse-CDF sampler over a probability table.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const double> probabilities) : cdf_(probabilities.size()) {
    std::partial_sum(probabilities.begin(), probabilities.end(), cdf_.begin());
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow; -log(sigmoid(x)) == softplus(-x).
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

struct SgnsGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

// Negative log-likelihood of one (center, context) pair against its negatives,
//   loss = -log s(u_o . v_c) - sum_k log s(-u_k . v_c),
// and its gradient with respect to v_c, u_o and each u_k.
inline SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                                  std::span<const std::vector<double>> negatives) {
  const std::size_t dim = center.size();
  if (context.size() != dim) throw ConfigError("context vector dimension mismatch");
  for (const auto& neg : negatives) {
    if (neg.size() != dim) throw ConfigError("negative vector dimension mismatch");
  }
  SgnsGradient g;
  g.center.assign(dim, 0.0);

  const double s_pos = detail::dot(context, center);
  g.loss = detail::softplus(-s_pos);
  const double coef_pos = detail::sigmoid(s_pos) - 1.0;
  g.context.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    g.context[i] = coef_pos * center[i];
    g.center[i] += coef_pos * context[i];
  }
  for (const auto& neg : negatives) {
    const double s = detail::dot(neg, center);
    g.loss += detail::softplus(s);
    const double coef = detail::sigmoid(s);
    std::vector<double> gn(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      gn[i] = coef * center[i];
      g.center[i] += coef * neg[i];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

}  // namespace divergelex
