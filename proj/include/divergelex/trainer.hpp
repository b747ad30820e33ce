#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/embedding.hpp"
#include "divergelex/error.hpp"
#include "divergelex/random.hpp"

namespace divergelex {

struct TrainingConfig {
  std::size_t dimension = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_learning_rate = 0.025;
  std::uint64_t min_count = 5;
  double subsample_threshold = 1e-4;
  double unigram_power = 0.75;
  std::uint64_t seed = 1;
  // 1 is the deterministic mode; more threads update shared matrices without locks.
  std::size_t threads = 1;
};

inline void validate(const TrainingConfig& c) {
  if (c.dimension < 2) throw ConfigError("dimension must be at least 2");
  if (c.window == 0) throw ConfigError("window must be positive");
  if (c.negatives == 0) throw ConfigError("negatives must be positive");
  if (c.epochs == 0) throw ConfigError("epochs must be positive");
  if (!(c.initial_learning_rate > 0.0) || !std::isfinite(c.initial_learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (c.min_count == 0) throw ConfigError("min_count must be positive");
  if (!(c.subsample_threshold >= 0.0)) throw ConfigError("subsample threshold must be non-negative");
  if (!std::isfinite(c.unigram_power) || c.unigram_power < 0.0) {
    throw ConfigError("unigram power must be a non-negative real");
  }
  if (c.threads == 0) throw ConfigError("threads must be positive");
}

struct TrainingStats {
  std::vector<double> epoch_loss;  // mean pair loss per epoch
  std::uint64_t pairs = 0;
  std::uint64_t corpus_tokens = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

namespace detail {

// Probability of keeping each occurrence of a word under frequent-word subsampling.
inline std::vector<double> keep_probabilities(const Vocabulary& vocab, double threshold) {
  std::vector<double> keep(vocab.size(), 1.0);
  if (threshold <= 0.0) return keep;
  const auto total = static_cast<double>(vocab.total_tokens());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f = static_cast<double>(vocab.count(i)) / total;
    const double discard = std::clamp(1.0 - std::sqrt(threshold / f), 0.0, 1.0);
    keep[i] = 1.0 - discard;
  }
  return keep;
}

struct TrainerState {
  const TrainingConfig& config;
  const std::vector<std::vector<std::uint32_t>>& docs;
  const std::vector<double>& keep;
  const NegativeSampler& sampler;
  double* input;
  double* output;
  double total_work;
};

struct ShardResult {
  double loss = 0.0;
  std::uint64_t pairs = 0;
  bool finite = true;
};

// One SGD step on a (center, context) pair with sampled negatives. Mirrors
// sgns_gradient: output rows move immediately, the center row after all
// terms are accumulated.
inline double sgns_step(const TrainerState& st, std::uint32_t center, std::uint32_t context, double lr,
                        Rng& rng, std::vector<double>& grad) {
  const std::size_t dim = st.config.dimension;
  double* v = st.input + static_cast<std::size_t>(center) * dim;
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;

  auto apply = [&](std::uint32_t target, bool positive) {
    double* u = st.output + static_cast<std::size_t>(target) * dim;
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += u[i] * v[i];
    loss += positive ? softplus(-s) : softplus(s);
    const double coef = sigmoid(s) - (positive ? 1.0 : 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      grad[i] += coef * u[i];
      u[i] -= lr * coef * v[i];
    }
  };

  apply(context, true);
  for (std::size_t k = 0; k < st.config.negatives; ++k) {
    const auto neg = static_cast<std::uint32_t>(st.sampler.sample(rng));
    if (neg == context) continue;
    apply(neg, false);
  }
  for (std::size_t i = 0; i < dim; ++i) v[i] -= lr * grad[i];
  return loss;
}

// Trains over docs[begin, end) for one epoch. `progress` counts corpus
// tokens consumed across all shards and drives the learning-rate decay.
inline ShardResult run_shard(const TrainerState& st, std::size_t begin, std::size_t end, Rng& rng,
                             std::atomic<std::uint64_t>& progress) {
  const auto& cfg = st.config;
  const double lr0 = cfg.initial_learning_rate;
  const double lr_floor = lr0 * 1e-4;
  ShardResult res;
  std::vector<double> grad(cfg.dimension);
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> raw_pos;

  for (std::size_t d = begin; d < end; ++d) {
    const auto& doc = st.docs[d];
    kept.clear();
    raw_pos.clear();
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const double p = st.keep[doc[i]];
      if (p >= 1.0 || rng.uniform() < p) {
        kept.push_back(doc[i]);
        raw_pos.push_back(static_cast<std::uint32_t>(i));
      }
    }
    const auto base = static_cast<double>(progress.load(std::memory_order_relaxed));
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
      const double done = (base + raw_pos[pos]) / st.total_work;
      const double lr = std::max(lr_floor, lr0 * (1.0 - done));
      const std::size_t reach = cfg.window - rng.index(cfg.window);
      const std::size_t lo = pos >= reach ? pos - reach : 0;
      const std::size_t hi = std::min(kept.size() - 1, pos + reach);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == pos) continue;
        res.loss += sgns_step(st, kept[pos], kept[c], lr, rng, grad);
        ++res.pairs;
      }
    }
    progress.fetch_add(doc.size(), std::memory_order_relaxed);
    if (!std::isfinite(res.loss)) {
      res.finite = false;
      return res;
    }
  }
  return res;
}

}  // namespace detail

// Skip-gram with negative sampling. The vocabulary is built from `corpus`
// with config.min_count; out-of-vocabulary tokens are skipped. With
// threads == 1 the result depends only on (corpus, config).
inline EmbeddingSpace train(std::span<const TokenizedDocument> corpus, const TrainingConfig& config,
                            std::string tag = {}, TrainingStats* stats = nullptr,
                            const EpochCallback& on_epoch = {}) {
  validate(config);
  if (corpus.empty()) throw DataError("training corpus is empty");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].tokens.size() < kMinTrainableTokens) {
      throw DataError("training document " + std::to_string(i) + " has fewer than two tokens");
    }
  }
  auto vocab = build_vocabulary(corpus, config.min_count);
  const std::size_t rows = vocab.size();
  const std::size_t dim = config.dimension;

  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(corpus.size());
  std::uint64_t tokens = 0;
  for (const auto& doc : corpus) {
    std::vector<std::uint32_t> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) {
      if (auto idx = vocab.find(t)) ids.push_back(static_cast<std::uint32_t>(*idx));
    }
    tokens += ids.size();
    docs.push_back(std::move(ids));
  }

  Rng rng(config.seed);
  std::vector<double> input(rows * dim);
  for (auto& x : input) x = (rng.uniform() - 0.5) / static_cast<double>(dim);
  std::vector<double> output(rows * dim, 0.0);

  const auto probabilities = negative_distribution(vocab, config.unigram_power);
  const NegativeSampler sampler(probabilities);
  const auto keep = detail::keep_probabilities(vocab, config.subsample_threshold);
  const detail::TrainerState state{config, docs, keep, sampler, input.data(), output.data(),
                                   static_cast<double>(tokens) * static_cast<double>(config.epochs) + 1.0};

  TrainingStats local;
  local.corpus_tokens = tokens;
  std::atomic<std::uint64_t> progress{0};
  const std::size_t workers = std::min(config.threads, docs.size());
  std::vector<Rng> worker_rngs;
  for (std::size_t w = 1; w < workers; ++w) worker_rngs.emplace_back(Rng::derive(config.seed, w));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    detail::ShardResult total;
    if (workers <= 1) {
      total = detail::run_shard(state, 0, docs.size(), rng, progress);
    } else {
      std::vector<detail::ShardResult> parts(workers);
      std::vector<std::thread> pool;
      const std::size_t chunk = (docs.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = std::min(docs.size(), w * chunk);
        const std::size_t e = std::min(docs.size(), b + chunk);
        Rng* r = w == 0 ? &rng : &worker_rngs[w - 1];
        pool.emplace_back([&, w, b, e, r] { parts[w] = detail::run_shard(state, b, e, *r, progress); });
      }
      for (auto& t : pool) t.join();
      for (const auto& p : parts) {
        total.loss += p.loss;
        total.pairs += p.pairs;
        total.finite = total.finite && p.finite;
      }
    }
    if (!total.finite || !std::isfinite(total.loss)) throw NonFiniteLossError(epoch + 1);
    const double mean = total.pairs ? total.loss / static_cast<double>(total.pairs) : 0.0;
    local.epoch_loss.push_back(mean);
    local.pairs += total.pairs;
    if (on_epoch) on_epoch(epoch + 1, mean);
  }

  EmbeddingSpace space(std::move(vocab), dim, std::move(input), std::move(output), std::move(tag));
  if (stats) *stats = std::move(local);
  return space;
}

}  // namespace divergelex
