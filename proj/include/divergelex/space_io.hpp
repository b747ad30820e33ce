#pragma once

// On-disk layout of an embedding space saved at PATH:
//
//   PATH            text vectors: "vocab_size dimension" header, then one
//                   "token v1 ... vd" line per word in index order, reals
//                   printed with 9 significant digits, LF line endings.
//   PATH.bin        binary sidecar, all integers and reals little-endian:
//                     bytes 0-3   magic "DVLX"
//                     byte  4     format version (1)
//                     bytes 5-12  u64 row count
//                     bytes 13-20 u64 dimension
//                     byte  21    1 if the output matrix follows, else 0
//                     then        input matrix, f64 row-major
//                     then        output matrix, f64 row-major (if flagged)
//   PATH.vocab.tsv  "token<TAB>count" per word in index order.
//   PATH.meta.json  optional {"tag": ..., "training": {...}} provenance.
//
// load_space takes vectors from the sidecar when present (bit-exact) and
// from the text file otherwise.

#include <array>
#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divergelex/corpus_io.hpp"
#include "divergelex/embedding.hpp"
#include "divergelex/error.hpp"

namespace divergelex {

inline constexpr std::array<char, 4> kSidecarMagic{'D', 'V', 'L', 'X'};
inline constexpr std::uint8_t kSidecarVersion = 1;

inline std::filesystem::path sidecar_path(const std::filesystem::path& p) { return p.string() + ".bin"; }
inline std::filesystem::path vocab_path(const std::filesystem::path& p) { return p.string() + ".vocab.tsv"; }
inline std::filesystem::path meta_path(const std::filesystem::path& p) { return p.string() + ".meta.json"; }

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline void write_text_vectors(std::ostream& out, const EmbeddingSpace& space) {
  out << space.size() << ' ' << space.dimension() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.vocab().token(i);
    for (double x : space.vector(i)) out << ' ' << format_real(x);
    out << '\n';
  }
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& in, const std::string& source) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError(source, 0, "truncated sidecar");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline void put_matrix(std::ostream& out, const std::vector<double>& m) {
  for (double x : m) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

inline std::vector<double> get_matrix(std::istream& in, std::size_t n, const std::string& source) {
  std::vector<double> m(n);
  for (auto& x : m) x = std::bit_cast<double>(get_u64(in, source));
  return m;
}

}  // namespace detail

inline void write_sidecar(std::ostream& out, const EmbeddingSpace& space) {
  out.write(kSidecarMagic.data(), kSidecarMagic.size());
  out.put(static_cast<char>(kSidecarVersion));
  detail::put_u64(out, space.size());
  detail::put_u64(out, space.dimension());
  out.put(space.has_output() ? 1 : 0);
  detail::put_matrix(out, space.input_matrix());
  if (space.has_output()) detail::put_matrix(out, space.output_matrix());
}

struct SidecarContents {
  std::size_t rows;
  std::size_t dimension;
  std::vector<double> input;
  std::vector<double> output;
};

inline SidecarContents read_sidecar(std::istream& in, const std::string& source) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kSidecarMagic) {
    throw FormatError(source, 0, "bad magic bytes");
  }
  const int version = in.get();
  if (version != kSidecarVersion) throw FormatError(source, 0, "unsupported format version");
  SidecarContents c;
  c.rows = detail::get_u64(in, source);
  c.dimension = detail::get_u64(in, source);
  const int has_output = in.get();
  if (has_output != 0 && has_output != 1) throw FormatError(source, 0, "bad output flag");
  c.input = detail::get_matrix(in, c.rows * c.dimension, source);
  if (has_output) c.output = detail::get_matrix(in, c.rows * c.dimension, source);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(source, 0, "trailing bytes");
  return c;
}

struct TextVectors {
  std::vector<std::string> tokens;
  std::size_t dimension = 0;
  std::vector<double> values;
};

inline TextVectors read_text_vectors(std::istream& in, const std::string& source) {
  TextVectors tv;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source, 1, "missing header");
  std::size_t rows = 0;
  {
    std::istringstream header(line);
    long long r = -1, d = -1;
    std::string extra;
    if (!(header >> r >> d) || (header >> extra) || r < 0 || d <= 0) {
      throw FormatError(source, 1, "header must be 'vocab_size dimension'");
    }
    rows = static_cast<std::size_t>(r);
    tv.dimension = static_cast<std::size_t>(d);
  }
  tv.tokens.reserve(rows);
  tv.values.reserve(rows * tv.dimension);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (tv.tokens.size() == rows) throw FormatError(source, line_no, "more rows than the header declares");
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::size_t got = 0;
    std::string field;
    while (fields >> field) {
      errno = 0;
      char* end = nullptr;
      const double x = std::strtod(field.c_str(), &end);
      if (end != field.c_str() + field.size() || errno == ERANGE) {
        throw FormatError(source, line_no, "'" + field + "' is not a real number");
      }
      tv.values.push_back(x);
      ++got;
    }
    if (got != tv.dimension) {
      throw FormatError(source, line_no,
                        "expected " + std::to_string(tv.dimension) + " values, found " + std::to_string(got));
    }
    tv.tokens.push_back(std::move(token));
  }
  if (tv.tokens.size() != rows) {
    throw FormatError(source, line_no, "header declares " + std::to_string(rows) + " rows, found " +
                                           std::to_string(tv.tokens.size()));
  }
  return tv;
}

inline void save_space(const EmbeddingSpace& space, const std::filesystem::path& path,
                       const nlohmann::json& training = nullptr) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    auto out = detail::open_for_write(path);
    write_text_vectors(out, space);
  }
  {
    auto out = detail::open_for_write(sidecar_path(path));
    write_sidecar(out, space);
  }
  {
    auto out = detail::open_for_write(vocab_path(path));
    write_vocabulary(out, space.vocab());
  }
  nlohmann::json meta{{"tag", space.tag()}};
  if (!training.is_null()) meta["training"] = training;
  auto out = detail::open_for_write(meta_path(path));
  out << meta.dump(2) << '\n';
}

inline EmbeddingSpace load_space(const std::filesystem::path& path) {
  const std::string source = path.string();
  TextVectors tv;
  {
    auto in = detail::open_for_read(path);
    tv = read_text_vectors(in, source);
  }
  if (!std::filesystem::exists(vocab_path(path))) {
    throw FormatError(vocab_path(path).string(), 0, "vocabulary counts file is missing");
  }
  Vocabulary vocab;
  {
    auto in = detail::open_for_read(vocab_path(path));
    vocab = read_vocabulary(in, vocab_path(path).string());
  }
  if (vocab.size() != tv.tokens.size()) {
    throw FormatError(vocab_path(path).string(), 0, "vocabulary size does not match the vector file");
  }
  // Rows are stored in vocabulary order; map them by token regardless.
  std::vector<std::size_t> row_of(vocab.size(), vocab.size());
  for (std::size_t r = 0; r < tv.tokens.size(); ++r) {
    auto idx = vocab.find(tv.tokens[r]);
    if (!idx || row_of[*idx] != vocab.size()) {
      throw FormatError(source, r + 2, "token '" + tv.tokens[r] + "' missing from vocabulary or repeated");
    }
    row_of[*idx] = r;
  }

  const std::size_t dim = tv.dimension;
  std::vector<double> stored_input = std::move(tv.values);
  std::vector<double> stored_output;
  if (std::filesystem::exists(sidecar_path(path))) {
    auto in = detail::open_for_read(sidecar_path(path));
    auto side = read_sidecar(in, sidecar_path(path).string());
    if (side.rows != vocab.size() || side.dimension != dim) {
      throw FormatError(sidecar_path(path).string(), 0, "sidecar shape does not match the vector file");
    }
    stored_input = std::move(side.input);
    stored_output = std::move(side.output);
  }
  auto reorder = [&](const std::vector<double>& m) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      std::copy_n(m.begin() + static_cast<std::ptrdiff_t>(row_of[i] * dim), dim,
                  out.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    return out;
  };
  auto input = reorder(stored_input);
  auto output = stored_output.empty() ? std::vector<double>{} : reorder(stored_output);

  std::string tag = path.stem().string();
  if (std::filesystem::exists(meta_path(path))) {
    auto in = detail::open_for_read(meta_path(path));
    try {
      auto meta = nlohmann::json::parse(in);
      if (meta.contains("tag") && meta["tag"].is_string()) tag = meta["tag"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(meta_path(path).string(), 0, e.what());
    }
  }
  return EmbeddingSpace(std::move(vocab), dim, std::move(input), std::move(output), std::move(tag));
}

}  // namespace divergelex
