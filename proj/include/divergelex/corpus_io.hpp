#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divergelex/corpus.hpp"
#include "divergelex/error.hpp"

namespace divergelex {

struct MalformedRecord {
  std::size_t line;
  std::string reason;
};

struct RecordBatch {
  std::vector<LabeledDocument> documents;
  std::vector<MalformedRecord> malformed;
};

// One JSON object per line: {"group": str, "text": str, "retweet": bool?}.
// Blank lines are ignored; malformed lines are collected, not thrown.
inline RecordBatch read_jsonl(std::istream& in) {
  RecordBatch batch;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      batch.malformed.push_back({line_no, "invalid JSON"});
      continue;
    }
    if (!record.is_object()) {
      batch.malformed.push_back({line_no, "record is not an object"});
      continue;
    }
    auto group = record.find("group");
    auto text = record.find("text");
    if (group == record.end() || !group->is_string() || group->get<std::string>().empty()) {
      batch.malformed.push_back({line_no, "missing or empty string field 'group'"});
      continue;
    }
    if (text == record.end() || !text->is_string()) {
      batch.malformed.push_back({line_no, "missing string field 'text'"});
      continue;
    }
    LabeledDocument doc{group->get<std::string>(), text->get<std::string>(), std::nullopt};
    if (auto rt = record.find("retweet"); rt != record.end()) {
      if (!rt->is_boolean()) {
        batch.malformed.push_back({line_no, "field 'retweet' is not a boolean"});
        continue;
      }
      doc.is_retweet = rt->get<bool>();
    }
    batch.documents.push_back(std::move(doc));
  }
  return batch;
}

// One document per line, all carrying `group_tag`.
inline std::vector<LabeledDocument> read_plain_text(std::istream& in, const std::string& group_tag) {
  std::vector<LabeledDocument> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    docs.push_back({group_tag, line, std::nullopt});
  }
  return docs;
}

inline void write_tokens(std::ostream& out, std::span<const TokenizedDocument> docs) {
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << doc.tokens[i];
    }
    out << '\n';
  }
}

// Reads a token file back; every line becomes a document tagged `group_tag`.
inline std::vector<TokenizedDocument> read_tokens(std::istream& in, const std::string& group_tag) {
  std::vector<TokenizedDocument> docs;
  std::string line;
  while (std::getline(in, line)) {
    TokenizedDocument doc{group_tag, {}};
    std::istringstream words(line);
    std::string w;
    while (words >> w) doc.tokens.push_back(w);
    if (!doc.tokens.empty()) docs.push_back(std::move(doc));
  }
  return docs;
}

inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.token(i) << '\t' << vocab.count(i) << '\n';
  }
}

inline Vocabulary read_vocabulary(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError(source, line_no, "expected 'token<TAB>count'");
    }
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError(source, line_no, "count is not a non-negative integer");
    }
    entries.emplace_back(line.substr(0, tab), count);
  }
  try {
    return Vocabulary::from_counts(std::move(entries));
  } catch (const DataError& e) {
    throw FormatError(source, 0, e.what());
  }
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace detail

}  // namespace divergelex
