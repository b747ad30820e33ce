#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divergelex/embedding.hpp"
#include "divergelex/error.hpp"

namespace divergelex {

// A word's top-n neighbors in one group's space: how that group interprets it.
struct InterpretingSet {
  std::string word;
  std::string group_tag;
  std::vector<Neighbor> neighbors;
};

inline InterpretingSet interpreting_set(const EmbeddingSpace& space, std::string_view word, std::size_t n) {
  return {std::string(word), space.tag(), nearest_neighbors(space, word, n)};
}

struct Centroid {
  std::vector<double> vector;
  std::vector<std::string> dropped;  // neighbors missing from the global space
};

// Similarity-weighted mean of the neighbors' global vectors. Neighbors with
// non-positive similarity carry no weight; neighbors absent from the global
// vocabulary are skipped and reported in `dropped`.
inline Centroid weighted_centroid(const EmbeddingSpace& global, const InterpretingSet& set) {
  Centroid c;
  c.vector.assign(global.dimension(), 0.0);
  double weight = 0.0;
  for (const auto& nb : set.neighbors) {
    if (!(nb.similarity > 0.0)) continue;
    auto idx = global.vocab().find(nb.token);
    if (!idx) {
      c.dropped.push_back(nb.token);
      continue;
    }
    const auto v = global.vector(*idx);
    for (std::size_t i = 0; i < v.size(); ++i) c.vector[i] += nb.similarity * v[i];
    weight += nb.similarity;
  }
  if (weight == 0.0) throw EmptyProjectionError(set.word);
  for (auto& x : c.vector) x /= weight;
  return c;
}

// 1 - cosine between the two sets' global centroids, in [0, 2].
inline double divergence_score(const EmbeddingSpace& global, const InterpretingSet& set_1,
                               const InterpretingSet& set_2) {
  const auto c1 = weighted_centroid(global, set_1);
  const auto c2 = weighted_centroid(global, set_2);
  return 1.0 - cosine_similarity(c1.vector, c2.vector);
}

// Words in all three vocabularies with at least `min_count_each` occurrences
// in each group, sorted lexicographically.
inline std::vector<std::string> candidate_words(const Vocabulary& vocab_1, const Vocabulary& vocab_2,
                                                const Vocabulary& global, std::uint64_t min_count_each) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab_1.size(); ++i) {
    const auto& w = vocab_1.token(i);
    if (vocab_1.count(i) < min_count_each) continue;
    auto j = vocab_2.find(w);
    if (!j || vocab_2.count(*j) < min_count_each) continue;
    if (!global.contains(w)) continue;
    words.push_back(w);
  }
  if (words.empty()) throw EmptyCandidatesError();
  std::sort(words.begin(), words.end());
  return words;
}

struct WordDivergence {
  std::string word;
  double score = 0.0;
  InterpretingSet set_1;
  InterpretingSet set_2;
  std::vector<std::string> dropped_1;
  std::vector<std::string> dropped_2;
};

struct ReportMetadata {
  std::string group_1;
  std::string group_2;
  std::string global_tag;
  std::size_t n = 0;
  std::size_t top_k = 0;
  std::uint64_t min_count_each = 0;
  std::size_t candidates = 0;
  std::size_t scored = 0;
  std::size_t skipped_empty_projection = 0;
};

struct DivergenceReport {
  ReportMetadata metadata;
  std::vector<WordDivergence> entries;
};

inline bool divergence_before(const WordDivergence& a, const WordDivergence& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.word < b.word;
}

// Scores every candidate word and keeps the top_k by descending score
// (ties lexicographic). top_k == 0 keeps every scored word.
inline DivergenceReport rank_divergences(const EmbeddingSpace& space_1, const EmbeddingSpace& space_2,
                                         const EmbeddingSpace& global, std::size_t n, std::size_t top_k,
                                         std::uint64_t min_count_each) {
  if (n == 0) throw ConfigError("interpreting-set size must be positive");
  const auto words = candidate_words(space_1.vocab(), space_2.vocab(), global.vocab(), min_count_each);
  DivergenceReport report;
  auto& meta = report.metadata;
  meta.group_1 = space_1.tag();
  meta.group_2 = space_2.tag();
  meta.global_tag = global.tag();
  meta.n = n;
  meta.top_k = top_k;
  meta.min_count_each = min_count_each;
  meta.candidates = words.size();

  report.entries.reserve(words.size());
  for (const auto& w : words) {
    WordDivergence wd;
    wd.word = w;
    wd.set_1 = interpreting_set(space_1, w, n);
    wd.set_2 = interpreting_set(space_2, w, n);
    try {
      auto c1 = weighted_centroid(global, wd.set_1);
      auto c2 = weighted_centroid(global, wd.set_2);
      wd.score = 1.0 - cosine_similarity(c1.vector, c2.vector);
      wd.dropped_1 = std::move(c1.dropped);
      wd.dropped_2 = std::move(c2.dropped);
    } catch (const EmptyProjectionError&) {
      ++meta.skipped_empty_projection;
      continue;
    } catch (const ZeroVectorError&) {
      ++meta.skipped_empty_projection;
      continue;
    }
    report.entries.push_back(std::move(wd));
  }
  meta.scored = report.entries.size();
  std::sort(report.entries.begin(), report.entries.end(), divergence_before);
  if (top_k != 0 && report.entries.size() > top_k) report.entries.resize(top_k);
  return report;
}

}  // namespace divergelex
