#pragma once

#include <functional>
#include <string>

#include "divergelex/corpus.hpp"
#include "divergelex/divergence.hpp"
#include "divergelex/embedding.hpp"
#include "divergelex/report.hpp"
#include "divergelex/trainer.hpp"

namespace divergelex {

inline constexpr const char* kGlobalTag = "combined";

struct PipelineResult {
  EmbeddingSpace space_1;
  EmbeddingSpace space_2;
  EmbeddingSpace global;
  DivergenceReport report;
};

// Progress hook: (space tag, epoch, mean loss).
using PipelineProgress = std::function<void(const std::string&, std::size_t, double)>;

// Trains the two group spaces and the global space from one seed, then ranks.
inline PipelineResult run_pipeline(const GroupedCorpus& corpus, const RunConfig& config,
                                   const PipelineProgress& progress = {}) {
  auto train_one = [&](std::span<const TokenizedDocument> docs, const std::string& tag) {
    EpochCallback cb;
    if (progress) cb = [&](std::size_t e, double l) { progress(tag, e, l); };
    return train(docs, config.training, tag, nullptr, cb);
  };
  PipelineResult r;
  r.space_1 = train_one(corpus.group(0), corpus.tag(0));
  r.space_2 = train_one(corpus.group(1), corpus.tag(1));
  const auto combined = corpus.combined();
  r.global = train_one(combined, kGlobalTag);
  r.report = rank_divergences(r.space_1, r.space_2, r.global, config.n, config.top_k, config.min_count_each);
  return r;
}

}  // namespace divergelex
