#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divergelex/error.hpp"

namespace divergelex {

// ---------------------------------------------------------------------------
// UTF-8 helpers
// ---------------------------------------------------------------------------
namespace utf8 {

struct Decoded {
  char32_t cp;
  std::size_t length;
};

// Decodes one code point at `pos`. Invalid sequences decode as U+FFFD, length 1.
inline Decoded decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Letters and digits. Outside ASCII, everything that is not in a
// punctuation, symbol or emoji block counts as a word character.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  if (cp == 0xFFFD) return false;
  return true;
}

// Case folding for ASCII, Latin-1, Greek and Cyrillic capitals.
inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

inline std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode(s, i);
    encode(to_lower(d.cp), out);
    i += d.length;
  }
  return out;
}

}  // namespace utf8

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

// One raw record. When is_retweet is unset, a leading "rt" token marks a retweet.
struct LabeledDocument {
  std::string group_tag;
  std::string text;
  std::optional<bool> is_retweet;
};

struct TokenizedDocument {
  std::string group_tag;
  std::vector<std::string> tokens;

  friend bool operator==(const TokenizedDocument&, const TokenizedDocument&) = default;
};

inline constexpr std::size_t kMinDocumentTokens = 10;
inline constexpr std::size_t kMinTrainableTokens = 2;

namespace detail {

inline std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t start = std::string_view::npos;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = utf8::decode(text, i);
    if (utf8::is_space(d.cp)) {
      if (start != std::string_view::npos) {
        pieces.push_back(text.substr(start, i - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += d.length;
  }
  if (start != std::string_view::npos) pieces.push_back(text.substr(start));
  return pieces;
}

// Drops leading non-word characters, stopping early at a '#' or '@' marker.
inline std::string_view strip_leading(std::string_view raw) {
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] == '#' || raw[i] == '@') break;
    const auto d = utf8::decode(raw, i);
    if (utf8::is_word_char(d.cp)) break;
    i += d.length;
  }
  return raw.substr(i);
}

inline std::string_view strip_trailing(std::string_view raw) {
  std::size_t end = 0;
  for (std::size_t i = 0; i < raw.size();) {
    const auto d = utf8::decode(raw, i);
    i += d.length;
    if (utf8::is_word_char(d.cp)) end = i;
  }
  return raw.substr(0, end);
}

inline bool is_url(std::string_view lowered) {
  return lowered.starts_with("http://") || lowered.starts_with("https://") ||
         lowered.starts_with("www.");
}

// Cleans one whitespace-delimited piece; empty result means the piece is dropped.
inline std::string clean_token(std::string_view raw) {
  auto piece = strip_leading(raw);
  if (piece.empty() || piece.front() == '#' || piece.front() == '@') return {};
  auto lowered = utf8::lower(piece);
  if (is_url(lowered)) return {};
  return std::string(strip_trailing(lowered));
}

}  // namespace detail

// Lowercased word tokens with hashtags, mentions and URLs removed and
// boundary punctuation stripped. Interior apostrophes and hyphens survive.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto piece : detail::split_whitespace(text)) {
    auto token = detail::clean_token(piece);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

inline bool looks_like_retweet(std::string_view text) {
  const auto pieces = detail::split_whitespace(text);
  if (pieces.empty()) return false;
  return utf8::lower(detail::strip_trailing(detail::strip_leading(pieces.front()))) == "rt";
}

enum class DropReason { kNone, kRetweet, kTooShort };

struct CleanResult {
  std::optional<TokenizedDocument> document;
  DropReason reason = DropReason::kNone;
};

inline CleanResult clean_document_with_reason(const LabeledDocument& doc) {
  const bool retweet = doc.is_retweet.value_or(looks_like_retweet(doc.text));
  if (retweet) return {std::nullopt, DropReason::kRetweet};
  auto tokens = tokenize(doc.text);
  if (tokens.size() < kMinDocumentTokens) return {std::nullopt, DropReason::kTooShort};
  return {TokenizedDocument{doc.group_tag, std::move(tokens)}, DropReason::kNone};
}

inline std::optional<TokenizedDocument> clean_document(const LabeledDocument& doc) {
  return clean_document_with_reason(doc).document;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

// Dense token index ordered by descending count, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Builds from (token, count) entries. Entries are re-sorted into canonical order.
  static Vocabulary from_counts(std::vector<std::pair<std::string, std::uint64_t>> entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    v.tokens_.reserve(entries.size());
    v.counts_.reserve(entries.size());
    for (auto& [token, count] : entries) {
      if (token.empty()) throw DataError("vocabulary token must be non-empty");
      if (!v.index_.emplace(token, v.tokens_.size()).second) {
        throw DataError("duplicate vocabulary token '" + token + "'");
      }
      v.total_ += count;
      v.tokens_.push_back(std::move(token));
      v.counts_.push_back(count);
    }
    return v;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::uint64_t total_tokens() const noexcept { return total_; }

  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  std::optional<std::size_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view token) const {
    auto idx = find(token);
    if (!idx) throw UnknownWordError(std::string(token));
    return *idx;
  }

  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::uint64_t count(std::size_t index) const { return counts_.at(index); }
  std::uint64_t count_of(std::string_view token) const {
    auto idx = find(token);
    return idx ? counts_[*idx] : 0;
  }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_ = 0;
};

// Raw token counts; std::map keeps the merge order deterministic.
inline std::map<std::string, std::uint64_t> count_tokens(std::span<const TokenizedDocument> docs) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc.tokens) ++counts[t];
  }
  return counts;
}

inline Vocabulary build_vocabulary(std::span<const TokenizedDocument> docs, std::uint64_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [token, count] : count_tokens(docs)) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  if (kept.empty()) throw EmptyVocabularyError();
  return Vocabulary::from_counts(std::move(kept));
}

// Deletes out-of-vocabulary tokens; documents left with fewer than two tokens are dropped.
inline std::vector<TokenizedDocument> apply_vocabulary(std::span<const TokenizedDocument> docs,
                                                       const Vocabulary& vocab) {
  if (vocab.empty()) throw EmptyVocabularyError();
  std::vector<TokenizedDocument> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    TokenizedDocument kept{doc.group_tag, {}};
    for (const auto& t : doc.tokens) {
      if (vocab.contains(t)) kept.tokens.push_back(t);
    }
    if (kept.tokens.size() >= kMinTrainableTokens) out.push_back(std::move(kept));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grouped corpus
// ---------------------------------------------------------------------------

class GroupedCorpus {
 public:
  GroupedCorpus(std::string tag_a, std::vector<TokenizedDocument> docs_a, std::string tag_b,
                std::vector<TokenizedDocument> docs_b)
      : tags_{std::move(tag_a), std::move(tag_b)}, docs_{std::move(docs_a), std::move(docs_b)} {
    if (tags_[0].empty() || tags_[1].empty() || tags_[0] == tags_[1]) {
      throw ConfigError("a grouped corpus needs two distinct, non-empty group tags");
    }
  }

  const std::string& tag(std::size_t group) const { return tags_.at(group); }
  const std::vector<TokenizedDocument>& group(std::size_t group) const { return docs_.at(group); }

  const std::vector<TokenizedDocument>& group(std::string_view tag) const {
    if (tag == tags_[0]) return docs_[0];
    if (tag == tags_[1]) return docs_[1];
    throw DataError("unknown group tag '" + std::string(tag) + "'");
  }

  // Group a followed by group b.
  std::vector<TokenizedDocument> combined() const {
    std::vector<TokenizedDocument> all;
    all.reserve(docs_[0].size() + docs_[1].size());
    all.insert(all.end(), docs_[0].begin(), docs_[0].end());
    all.insert(all.end(), docs_[1].begin(), docs_[1].end());
    return all;
  }

  std::size_t combined_size() const noexcept { return docs_[0].size() + docs_[1].size(); }

 private:
  std::array<std::string, 2> tags_;
  std::array<std::vector<TokenizedDocument>, 2> docs_;
};

// Partitions by tag. Groups are ordered by first appearance unless `declared`
// names the order; any tag outside `declared` is an error.
inline GroupedCorpus split_by_group(std::span<const TokenizedDocument> docs,
                                    std::optional<std::pair<std::string, std::string>> declared = {}) {
  std::vector<std::string> order;
  if (declared) {
    order = {declared->first, declared->second};
  }
  std::set<std::string> seen;
  for (const auto& doc : docs) {
    seen.insert(doc.group_tag);
    if (!declared && std::find(order.begin(), order.end(), doc.group_tag) == order.end()) {
      order.push_back(doc.group_tag);
    }
  }
  if (declared) {
    for (const auto& tag : seen) {
      if (tag != order[0] && tag != order[1]) {
        throw DataError("group tag '" + tag + "' is not one of the declared groups");
      }
    }
    if (seen.size() != 2) throw GroupCountError(seen.size());
  } else if (order.size() != 2) {
    throw GroupCountError(order.size());
  }
  std::vector<TokenizedDocument> a, b;
  for (const auto& doc : docs) {
    (doc.group_tag == order[0] ? a : b).push_back(doc);
  }
  return GroupedCorpus(order[0], std::move(a), order[1], std::move(b));
}

}  // namespace divergelex
