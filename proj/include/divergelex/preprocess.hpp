#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/corpus_io.hpp"

namespace divergelex {

struct PreprocessStats {
  std::size_t documents_in = 0;
  std::size_t malformed = 0;
  std::size_t retweets_dropped = 0;
  std::size_t short_dropped = 0;
  std::size_t cleaned_tokens = 0;
  std::size_t rare_tokens_removed = 0;
  std::size_t untrainable_dropped = 0;
  std::size_t documents_out = 0;
  std::size_t tokens_out = 0;
};

struct PreprocessResult {
  GroupedCorpus corpus;
  Vocabulary vocabulary;  // over the combined cleaned corpus
  PreprocessStats stats;
};

// Cleaning, then the rare-word filter over both groups jointly, then the
// group split. `declared` fixes the group order when given.
inline PreprocessResult preprocess(std::span<const LabeledDocument> records, std::uint64_t min_count,
                                   std::optional<std::pair<std::string, std::string>> declared = {}) {
  PreprocessStats stats;
  stats.documents_in = records.size();
  std::vector<TokenizedDocument> cleaned;
  cleaned.reserve(records.size());
  for (const auto& rec : records) {
    auto result = clean_document_with_reason(rec);
    switch (result.reason) {
      case DropReason::kRetweet: ++stats.retweets_dropped; break;
      case DropReason::kTooShort: ++stats.short_dropped; break;
      case DropReason::kNone:
        stats.cleaned_tokens += result.document->tokens.size();
        cleaned.push_back(std::move(*result.document));
        break;
    }
  }
  auto vocab = build_vocabulary(cleaned, min_count);
  auto kept = apply_vocabulary(cleaned, vocab);
  std::size_t kept_tokens = 0;
  for (const auto& d : kept) kept_tokens += d.tokens.size();
  std::size_t in_vocab_tokens = 0;
  for (const auto& d : cleaned) {
    for (const auto& t : d.tokens) in_vocab_tokens += vocab.contains(t) ? 1 : 0;
  }
  stats.rare_tokens_removed = stats.cleaned_tokens - in_vocab_tokens;
  stats.untrainable_dropped = cleaned.size() - kept.size();
  stats.documents_out = kept.size();
  stats.tokens_out = kept_tokens;
  auto grouped = split_by_group(kept, std::move(declared));
  // Recount over surviving documents so the file agrees with the token files.
  auto combined = grouped.combined();
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (auto& [t, c] : count_tokens(combined)) counts.emplace_back(t, c);
  return {std::move(grouped), Vocabulary::from_counts(std::move(counts)), stats};
}

inline void validate_group_tag(const std::string& tag) {
  if (tag.empty() || tag == "combined" || tag.front() == '.' ||
      tag.find_first_of("/\\\t\n ") != std::string::npos) {
    throw ConfigError("group tag '" + tag + "' cannot be used as a file name");
  }
}

// Writes <tag>.tokens and <tag>.vocab.tsv for both groups, plus
// combined.tokens and vocab.tsv for the joint corpus.
inline void write_preprocessed(const PreprocessResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& tag = result.corpus.tag(g);
    validate_group_tag(tag);
    const auto& docs = result.corpus.group(g);
    auto tokens = detail::open_for_write(dir / (tag + ".tokens"));
    write_tokens(tokens, docs);
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    for (auto& [t, c] : count_tokens(docs)) counts.emplace_back(t, c);
    auto vocab = detail::open_for_write(dir / (tag + ".vocab.tsv"));
    write_vocabulary(vocab, Vocabulary::from_counts(std::move(counts)));
  }
  auto combined = detail::open_for_write(dir / "combined.tokens");
  write_tokens(combined, result.corpus.combined());
  auto vocab = detail::open_for_write(dir / "vocab.tsv");
  write_vocabulary(vocab, result.vocabulary);
}

}  // namespace divergelex
