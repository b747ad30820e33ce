// divergelex: preprocess, train, diverge and synth-eval subcommands.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 acceptance threshold not met.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "divergelex/divergelex.hpp"

namespace fs = std::filesystem;
using namespace divergelex;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kThreshold = 3 };

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("divergelex");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("DIVERGELEX_LOG");
  if (!env) return;
  const std::string level(env);
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "warn") spdlog::set_level(spdlog::level::warn);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::warn("ignoring DIVERGELEX_LOG={} (expected error, warn, info or debug)", level);
}

void add_training_flags(CLI::App* cmd, TrainingConfig& t) {
  cmd->add_option("--dim", t.dimension, "Embedding dimension")->capture_default_str();
  cmd->add_option("--window", t.window, "Maximum context window")->capture_default_str();
  cmd->add_option("--negatives", t.negatives, "Negative samples per pair")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", t.initial_learning_rate, "Initial learning rate")->capture_default_str();
  cmd->add_option("--min-count", t.min_count, "Minimum token count")->capture_default_str();
  cmd->add_option("--subsample", t.subsample_threshold, "Subsampling threshold (0 disables)")
      ->capture_default_str();
  cmd->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", t.threads, "Worker threads (more than 1 is not bit-reproducible)")
      ->capture_default_str();
}

void add_divergence_flags(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("-n", c.n, "Interpreting-set size")->capture_default_str();
  cmd->add_option("--top-k", c.top_k, "Report rows to keep (0 keeps all)")->capture_default_str();
  cmd->add_option("--min-count-each", c.min_count_each, "Minimum count in each group")->capture_default_str();
}

void log_progress(const std::string& tag, std::size_t epoch, double loss) {
  spdlog::info("{} epoch {} loss {:.6f}", tag, epoch, loss);
}

void write_report(const DivergenceReport& report, const RunConfig& config, const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  auto tsv = detail::open_for_write(out);
  write_report_tsv(tsv, report, config);
  auto json = detail::open_for_write(out.string() + ".json");
  json << render_json(report, config);
  spdlog::info("wrote {} rows to {} and {}.json", report.entries.size(), out.string(), out.string());
}

struct PreprocessArgs {
  std::vector<std::string> inputs;
  std::string format = "jsonl";
  std::string group_a;
  std::string group_b;
  std::uint64_t min_count = 5;
  std::string out;
};

int cmd_preprocess(const PreprocessArgs& a) {
  std::vector<LabeledDocument> records;
  std::size_t malformed = 0;
  if (a.format == "text") {
    if (a.inputs.size() != 2 || a.group_a.empty() || a.group_b.empty()) {
      throw ConfigError("text format needs two --input files and both --group-a and --group-b");
    }
    for (std::size_t i = 0; i < 2; ++i) {
      auto in = detail::open_for_read(a.inputs[i]);
      auto docs = read_plain_text(in, i == 0 ? a.group_a : a.group_b);
      records.insert(records.end(), docs.begin(), docs.end());
    }
  } else {
    for (const auto& path : a.inputs) {
      auto in = detail::open_for_read(path);
      auto batch = read_jsonl(in);
      for (const auto& m : batch.malformed) spdlog::warn("{}:{}: skipped: {}", path, m.line, m.reason);
      malformed += batch.malformed.size();
      records.insert(records.end(), batch.documents.begin(), batch.documents.end());
    }
  }
  std::optional<std::pair<std::string, std::string>> declared;
  if (!a.group_a.empty() || !a.group_b.empty()) {
    if (a.group_a.empty() || a.group_b.empty()) throw ConfigError("--group-a and --group-b go together");
    declared.emplace(a.group_a, a.group_b);
  }
  auto result = preprocess(records, a.min_count, declared);
  result.stats.malformed = malformed;
  write_preprocessed(result, a.out);

  const auto& s = result.stats;
  std::cout << "documents_in=" << s.documents_in + s.malformed << '\n'
            << "malformed=" << s.malformed << '\n'
            << "retweets_dropped=" << s.retweets_dropped << '\n'
            << "short_dropped=" << s.short_dropped << '\n'
            << "cleaned_tokens=" << s.cleaned_tokens << '\n'
            << "rare_tokens_removed=" << s.rare_tokens_removed << '\n'
            << "untrainable_dropped=" << s.untrainable_dropped << '\n'
            << "documents_out=" << s.documents_out << '\n'
            << "tokens_out=" << s.tokens_out << '\n';
  for (std::size_t g = 0; g < 2; ++g) {
    std::cout << "group." << result.corpus.tag(g) << ".documents=" << result.corpus.group(g).size() << '\n';
  }
  return kOk;
}

int cmd_train(const RunConfig& c) {
  validate(c.training);
  if (c.inputs.size() != 1) throw ConfigError("train takes exactly one --input token file");
  const fs::path input = c.inputs.front();
  auto in = detail::open_for_read(input);
  const auto tag = input.stem().string();
  auto docs = read_tokens(in, tag);
  TrainingStats stats;
  auto space = train(docs, c.training, tag, &stats, [&](std::size_t e, double l) { log_progress(tag, e, l); });
  save_space(space, c.output, to_json(c.training));
  spdlog::info("saved {} x {} space '{}' to {} ({} pairs)", space.size(), space.dimension(), tag, c.output,
               stats.pairs);
  return kOk;
}

int cmd_diverge(RunConfig c) {
  if (c.inputs.size() != 3) throw ConfigError("diverge takes three --input spaces: group a, group b, global");
  auto s1 = load_space(c.inputs[0]);
  auto s2 = load_space(c.inputs[1]);
  auto global = load_space(c.inputs[2]);
  if (!c.group_a.empty()) s1.set_tag(c.group_a);
  if (!c.group_b.empty()) s2.set_tag(c.group_b);
  c.group_a = s1.tag();
  c.group_b = s2.tag();
  auto report = rank_divergences(s1, s2, global, c.n, c.top_k, c.min_count_each);
  if (report.metadata.skipped_empty_projection) {
    spdlog::warn("{} candidates skipped: interpreting set has no usable neighbor in the global space",
                 report.metadata.skipped_empty_projection);
  }
  write_report(report, c, c.output);
  return kOk;
}

int cmd_synth_eval(const synth::SynthSpec& spec, RunConfig c, double min_auc) {
  validate(c.training);
  auto data = synth::generate(spec);
  std::vector<LabeledDocument> records = data.corpus_1;
  records.insert(records.end(), data.corpus_2.begin(), data.corpus_2.end());
  auto prep = preprocess(records, 1, std::make_pair(data.tag_1, data.tag_2));
  c.group_a = data.tag_1;
  c.group_b = data.tag_2;
  auto result = run_pipeline(prep.corpus, c, log_progress);
  if (!c.output.empty()) write_report(result.report, c, c.output);
  const auto m = synth::evaluate(result.report, data.truth);
  std::cout << "entries=" << m.entries << '\n'
            << "planted_found=" << m.planted_found << '\n'
            << "controls_found=" << m.controls_found << '\n'
            << "median_planted_rank=" << m.median_planted_rank << '\n'
            << "median_planted_score=" << m.median_planted_score << '\n'
            << "control_p95_score=" << m.control_p95_score << '\n'
            << "top_decile_fraction=" << m.top_decile_fraction << '\n'
            << "auc=" << m.auc << '\n'
            << "config_digest=" << config_digest(c) << '\n';
  if (!(m.auc >= min_auc)) {
    spdlog::error("auc {} is below --min-auc {}", m.auc, min_auc);
    return kThreshold;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Divergent word interpretation between two groups of text"};
  app.require_subcommand(1);

  PreprocessArgs prep;
  auto* pre = app.add_subcommand("preprocess", "Clean records into per-group token and vocabulary files");
  pre->add_option("--input", prep.inputs, "Input file (repeatable)")->required();
  pre->add_option("--format", prep.format, "Input format")
      ->check(CLI::IsMember({"jsonl", "text"}))
      ->capture_default_str();
  pre->add_option("--group-a", prep.group_a, "First group tag");
  pre->add_option("--group-b", prep.group_b, "Second group tag");
  pre->add_option("--min-count", prep.min_count, "Minimum count over both groups")->capture_default_str();
  pre->add_option("--out", prep.out, "Output directory")->required();

  RunConfig train_cfg;
  auto* tr = app.add_subcommand("train", "Train one embedding space from a token file");
  tr->add_option("--input", train_cfg.inputs, "Token file")->required();
  tr->add_option("--out", train_cfg.output, "Output vector file")->required();
  add_training_flags(tr, train_cfg.training);

  RunConfig div_cfg;
  auto* dv = app.add_subcommand("diverge", "Rank words by divergence between two group spaces");
  dv->add_option("--input", div_cfg.inputs, "Spaces: group a, group b, global (in order)")->required();
  dv->add_option("--group-a", div_cfg.group_a, "Override the first group tag");
  dv->add_option("--group-b", div_cfg.group_b, "Override the second group tag");
  dv->add_option("--out", div_cfg.output, "Report path (TSV; JSON is written alongside)")->required();
  add_divergence_flags(dv, div_cfg);

  synth::SynthSpec spec;
  RunConfig synth_cfg;
  synth_cfg.training.dimension = 50;
  synth_cfg.top_k = 0;
  double min_auc = 0.9;
  auto* se = app.add_subcommand("synth-eval", "Generate a planted corpus, run the pipeline and score recovery");
  se->add_option("--vocab-size", spec.vocab_size, "Synthetic vocabulary size")->capture_default_str();
  se->add_option("--topics", spec.num_topics, "Number of topics")->capture_default_str();
  se->add_option("--planted", spec.planted_words, "Planted divergent words")->capture_default_str();
  se->add_option("--controls", spec.control_words, "Control words")->capture_default_str();
  se->add_option("--docs-per-group", spec.docs_per_group, "Documents per group")->capture_default_str();
  se->add_option("--doc-length", spec.doc_length, "Tokens per document")->capture_default_str();
  se->add_option("--min-auc", min_auc, "Fail with exit code 3 below this AUC")->capture_default_str();
  se->add_option("--out", synth_cfg.output, "Optional report path");
  add_training_flags(se, synth_cfg.training);
  add_divergence_flags(se, synth_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*pre) return cmd_preprocess(prep);
    if (*tr) return cmd_train(train_cfg);
    if (*dv) return cmd_diverge(div_cfg);
    spec.seed = synth_cfg.training.seed;
    return cmd_synth_eval(spec, synth_cfg, min_auc);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kData;
  }
}
