#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divergelex/divergence.hpp"
#include "divergelex/space_io.hpp"
#include "divergelex/trainer.hpp"

namespace divergelex {

// Fully resolved settings of one run; its digest is embedded in every report.
struct RunConfig {
  TrainingConfig training;
  std::size_t n = 20;
  std::size_t top_k = 100;
  std::uint64_t min_count_each = 5;
  std::vector<std::string> inputs;
  std::string output;
  std::string group_a;
  std::string group_b;
};

inline nlohmann::json to_json(const TrainingConfig& c) {
  return {{"dimension", c.dimension},
          {"window", c.window},
          {"negatives", c.negatives},
          {"epochs", c.epochs},
          {"initial_learning_rate", c.initial_learning_rate},
          {"min_count", c.min_count},
          {"subsample_threshold", c.subsample_threshold},
          {"unigram_power", c.unigram_power},
          {"seed", c.seed},
          {"threads", c.threads}};
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"training", to_json(c.training)},
          {"n", c.n},
          {"top_k", c.top_k},
          {"min_count_each", c.min_count_each},
          {"inputs", c.inputs},
          {"output", c.output},
          {"group_a", c.group_a},
          {"group_b", c.group_b}};
}

// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_digest(const RunConfig& c) { return fnv1a_hex(to_json(c).dump()); }

inline std::string format_set(const InterpretingSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.neighbors.size(); ++i) {
    if (i) out.push_back(',');
    out += set.neighbors[i].token;
    out.push_back(':');
    out += format_real(set.neighbors[i].similarity);
  }
  return out;
}

inline nlohmann::json metadata_json(const DivergenceReport& report, const RunConfig& config) {
  const auto& m = report.metadata;
  return {{"group_1", m.group_1},
          {"group_2", m.group_2},
          {"global", m.global_tag},
          {"n", m.n},
          {"top_k", m.top_k},
          {"min_count_each", m.min_count_each},
          {"candidates", m.candidates},
          {"scored", m.scored},
          {"skipped_empty_projection", m.skipped_empty_projection},
          {"vocabulary_scope", "per_training_corpus"},
          {"config", to_json(config)},
          {"config_digest", config_digest(config)}};
}

// Comment lines carry the metadata; then a header row and one row per word:
// word, score, set_1 and set_2 as "token:similarity,...".
inline void write_report_tsv(std::ostream& out, const DivergenceReport& report, const RunConfig& config) {
  const auto& m = report.metadata;
  out << "# divergelex divergence report\n";
  out << "# group_1=" << m.group_1 << " group_2=" << m.group_2 << " global=" << m.global_tag << " n=" << m.n
      << " top_k=" << m.top_k << " min_count_each=" << m.min_count_each << '\n';
  out << "# candidates=" << m.candidates << " scored=" << m.scored
      << " skipped_empty_projection=" << m.skipped_empty_projection << " vocabulary_scope=per_training_corpus\n";
  out << "# config_digest=" << config_digest(config) << '\n';
  out << "# config=" << to_json(config).dump() << '\n';
  out << "word\tscore\tset_1\tset_2\n";
  for (const auto& e : report.entries) {
    out << e.word << '\t' << format_real(e.score) << '\t' << format_set(e.set_1) << '\t' << format_set(e.set_2)
        << '\n';
  }
}

inline nlohmann::json report_json(const DivergenceReport& report, const RunConfig& config) {
  auto set_json = [](const InterpretingSet& s) {
    auto arr = nlohmann::json::array();
    for (const auto& nb : s.neighbors) arr.push_back({{"token", nb.token}, {"similarity", nb.similarity}});
    return arr;
  };
  auto entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"word", e.word},
                       {"score", e.score},
                       {"set_1", set_json(e.set_1)},
                       {"set_2", set_json(e.set_2)},
                       {"dropped_1", e.dropped_1},
                       {"dropped_2", e.dropped_2}});
  }
  return {{"metadata", metadata_json(report, config)}, {"entries", entries}};
}

inline std::string render_tsv(const DivergenceReport& report, const RunConfig& config) {
  std::ostringstream out;
  write_report_tsv(out, report, config);
  return out.str();
}

inline std::string render_json(const DivergenceReport& report, const RunConfig& config) {
  return report_json(report, config).dump(2) + "\n";
}

}  // namespace divergelex
