#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/divergence.hpp"
#include "divergelex/error.hpp"
#include "divergelex/random.hpp"

namespace divergelex::synth {

struct SynthSpec {
  std::size_t vocab_size = 2000;
  std::size_t num_topics = 10;
  std::size_t planted_words = 20;
  std::size_t control_words = 20;
  std::size_t docs_per_group = 20000;
  std::size_t doc_length = 15;
  std::uint64_t seed = 1;
};

struct PlantedWord {
  std::string word;
  std::size_t topic_1;
  std::size_t topic_2;
};

struct ControlWord {
  std::string word;
  std::size_t topic;
};

struct PlantedTruth {
  std::vector<PlantedWord> planted;
  std::vector<ControlWord> controls;
  std::vector<std::vector<std::string>> topic_words;  // disjoint per-topic vocabularies
};

struct SynthCorpus {
  std::string tag_1 = "a";
  std::string tag_2 = "b";
  std::vector<LabeledDocument> corpus_1;
  std::vector<LabeledDocument> corpus_2;
  PlantedTruth truth;
};

// Words every topic must own at minimum.
inline constexpr std::size_t kMinTopicWords = 2;
// Per-token probability of emitting one specific planted or control word.
inline constexpr double kSpecialWordRate = 0.01;

inline void validate(const SynthSpec& s) {
  if (s.num_topics == 0) throw InfeasibleSpecError("num_topics must be positive");
  if (s.planted_words > 0 && s.num_topics < 2) {
    throw InfeasibleSpecError("planted words need at least two topics");
  }
  const std::size_t special = s.planted_words + s.control_words;
  if (special > s.vocab_size || s.vocab_size - special < s.num_topics * kMinTopicWords) {
    throw InfeasibleSpecError("vocab_size cannot hold the planted, control and topic vocabularies");
  }
  if (s.doc_length < kMinDocumentTokens) {
    throw InfeasibleSpecError("doc_length must be at least " + std::to_string(kMinDocumentTokens));
  }
  if (s.docs_per_group == 0) throw InfeasibleSpecError("docs_per_group must be positive");
}

namespace detail {

inline std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

inline std::string topic_word(std::size_t topic, std::size_t rank) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "t%02zuw%03zu", topic, rank);
  return buf;
}

// Zipfian sampler over one topic's words plus its group-specific special words.
struct TopicSampler {
  std::vector<double> zipf_cdf;
  std::vector<std::string> const* words = nullptr;
  std::vector<std::string> specials;
  double special_rate = 0.0;

  const std::string& draw(Rng& rng) const {
    const double u = rng.uniform();
    const double special_mass = special_rate * static_cast<double>(specials.size());
    if (u < special_mass) {
      auto i = static_cast<std::size_t>(u / special_rate);
      return specials[std::min(i, specials.size() - 1)];
    }
    const double z = rng.uniform() * zipf_cdf.back();
    auto it = std::upper_bound(zipf_cdf.begin(), zipf_cdf.end(), z);
    if (it == zipf_cdf.end()) --it;
    return (*words)[static_cast<std::size_t>(it - zipf_cdf.begin())];
  }
};

}  // namespace detail

// Single-topic documents over disjoint topic vocabularies. A planted word
// lives in one topic in corpus_1 and a different topic in corpus_2; a control
// word lives in the same topic in both.
inline SynthCorpus generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SynthCorpus out;
  auto& truth = out.truth;
  const std::size_t k = spec.num_topics;

  for (std::size_t i = 0; i < spec.planted_words; ++i) {
    const std::size_t t1 = rng.index(k);
    const std::size_t t2 = (t1 + 1 + rng.index(k - 1)) % k;
    truth.planted.push_back({detail::numbered("planted", i, 3), t1, t2});
  }
  for (std::size_t i = 0; i < spec.control_words; ++i) {
    truth.controls.push_back({detail::numbered("control", i, 3), rng.index(k)});
  }

  const std::size_t topic_vocab = spec.vocab_size - spec.planted_words - spec.control_words;
  truth.topic_words.resize(k);
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t size = topic_vocab / k + (t < topic_vocab % k ? 1 : 0);
    for (std::size_t r = 0; r < size; ++r) truth.topic_words[t].push_back(detail::topic_word(t, r));
  }

  auto make_samplers = [&](bool second_group) {
    std::vector<detail::TopicSampler> samplers(k);
    for (std::size_t t = 0; t < k; ++t) {
      auto& s = samplers[t];
      s.words = &truth.topic_words[t];
      s.zipf_cdf.resize(s.words->size());
      double acc = 0.0;
      for (std::size_t r = 0; r < s.zipf_cdf.size(); ++r) s.zipf_cdf[r] = acc += 1.0 / static_cast<double>(r + 1);
    }
    for (const auto& p : truth.planted) samplers[second_group ? p.topic_2 : p.topic_1].specials.push_back(p.word);
    for (const auto& c : truth.controls) samplers[c.topic].specials.push_back(c.word);
    for (auto& s : samplers) {
      s.special_rate = s.specials.empty() ? 0.0
                                          : std::min(kSpecialWordRate, 0.5 / static_cast<double>(s.specials.size()));
    }
    return samplers;
  };

  auto fill = [&](std::vector<LabeledDocument>& docs, const std::string& tag, bool second_group) {
    const auto samplers = make_samplers(second_group);
    docs.reserve(spec.docs_per_group);
    for (std::size_t d = 0; d < spec.docs_per_group; ++d) {
      const auto& sampler = samplers[rng.index(k)];
      std::string text;
      for (std::size_t i = 0; i < spec.doc_length; ++i) {
        if (i) text.push_back(' ');
        text += sampler.draw(rng);
      }
      docs.push_back({tag, std::move(text), false});
    }
  };
  fill(out.corpus_1, out.tag_1, false);
  fill(out.corpus_2, out.tag_2, true);
  return out;
}

struct Metrics {
  std::size_t entries = 0;
  std::size_t planted_found = 0;
  std::size_t controls_found = 0;
  double median_planted_rank = 0.0;
  double median_planted_score = 0.0;
  double control_p95_score = 0.0;
  double top_decile_fraction = 0.0;
  double auc = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

// Linear interpolation between closest ranks.
inline double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace detail

// Probability that a positive outscores a negative, ties counting one half,
// via the mid-rank (Mann-Whitney) statistic.
inline double mid_rank_auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
  if (positives.empty() || negatives.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, bool>> all;
  for (double x : positives) all.emplace_back(x, true);
  for (double x : negatives) all.emplace_back(x, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (all[m].second) rank_sum += mid;
    }
    i = j;
  }
  const auto np = static_cast<double>(positives.size());
  const auto nn = static_cast<double>(negatives.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// Missing planted words count as the worst possible outcome (lowest score,
// last rank); missing controls as the highest score.
inline Metrics evaluate(const DivergenceReport& report, const PlantedTruth& truth) {
  Metrics m;
  m.entries = report.entries.size();
  std::map<std::string, double> score;
  for (const auto& e : report.entries) score.emplace(e.word, e.score);

  // Rank = 1 + number of strictly higher scores, so tie order does not matter.
  std::vector<double> sorted_scores;
  for (const auto& e : report.entries) sorted_scores.push_back(e.score);
  std::sort(sorted_scores.begin(), sorted_scores.end(), std::greater<>());
  auto rank_of = [&](double s) {
    auto it = std::lower_bound(sorted_scores.begin(), sorted_scores.end(), s, std::greater<>());
    return static_cast<double>(it - sorted_scores.begin()) + 1.0;
  };
  const double decile_cut = std::ceil(0.1 * static_cast<double>(m.entries));
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> planted_scores, planted_ranks, control_scores;
  std::size_t in_decile = 0;
  for (const auto& p : truth.planted) {
    auto it = score.find(p.word);
    if (it == score.end()) {
      planted_scores.push_back(-inf);
      planted_ranks.push_back(static_cast<double>(m.entries) + 1.0);
      continue;
    }
    ++m.planted_found;
    planted_scores.push_back(it->second);
    const double r = rank_of(it->second);
    planted_ranks.push_back(r);
    if (r <= decile_cut) ++in_decile;
  }
  for (const auto& c : truth.controls) {
    auto it = score.find(c.word);
    if (it == score.end()) {
      control_scores.push_back(inf);
      continue;
    }
    ++m.controls_found;
    control_scores.push_back(it->second);
  }
  m.median_planted_rank = detail::median(planted_ranks);
  m.median_planted_score = detail::median(planted_scores);
  m.control_p95_score = detail::percentile(control_scores, 0.95);
  m.top_decile_fraction =
      truth.planted.empty() ? 0.0 : static_cast<double>(in_decile) / static_cast<double>(truth.planted.size());
  m.auc = mid_rank_auc(planted_scores, control_scores);
  return m;
}

}  // namespace divergelex::synth
