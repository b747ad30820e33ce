#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "divergelex/space_io.hpp"

using namespace divergelex;
namespace fs = std::filesystem;

namespace {

EmbeddingSpace random_space(std::size_t words, std::size_t dim, std::uint64_t seed, bool with_output = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (std::size_t i = 0; i < words; ++i) entries.emplace_back("tok" + std::to_string(i), 5 + rng() % 50);
  auto vocab = Vocabulary::from_counts(entries);
  std::vector<double> in(words * dim), out(with_output ? words * dim : 0);
  for (auto& x : in) x = nd(rng) * std::pow(10.0, static_cast<int>(rng() % 9) - 4);
  for (auto& x : out) x = nd(rng);
  return EmbeddingSpace(std::move(vocab), dim, std::move(in), std::move(out), "grp");
}

class SpaceIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("divergelex_space_io_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

EmbeddingSpace parse_text(const std::string& text) {
  std::istringstream in(text);
  auto tv = read_text_vectors(in, "mem");
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (const auto& t : tv.tokens) entries.emplace_back(t, 1);
  return EmbeddingSpace(Vocabulary::from_counts(entries), tv.dimension, tv.values, {}, "");
}

}  // namespace

TEST_F(SpaceIo, SidecarRoundTripIsBitExact) {
  auto space = random_space(200, 13, 1);
  const auto path = dir_ / "g.vec";
  save_space(space, path, nlohmann::json{{"seed", 1}});
  auto back = load_space(path);
  EXPECT_EQ(back.vocab(), space.vocab());
  EXPECT_EQ(back.tag(), "grp");
  ASSERT_EQ(back.input_matrix().size(), space.input_matrix().size());
  EXPECT_EQ(0, std::memcmp(back.input_matrix().data(), space.input_matrix().data(),
                           space.input_matrix().size() * sizeof(double)));
  EXPECT_EQ(back.output_matrix(), space.output_matrix());
}

TEST_F(SpaceIo, TextOnlyRoundTripWithinNineDigits) {
  auto space = random_space(100, 7, 2, false);
  const auto path = dir_ / "t.vec";
  save_space(space, path);
  fs::remove(sidecar_path(path));
  fs::remove(meta_path(path));
  auto back = load_space(path);
  EXPECT_EQ(back.tag(), "t");
  EXPECT_FALSE(back.has_output());
  for (std::size_t i = 0; i < space.input_matrix().size(); ++i) {
    const double a = space.input_matrix()[i], b = back.input_matrix()[i];
    EXPECT_LE(std::abs(a - b), 5e-9 * std::abs(a)) << i;
    EXPECT_EQ(format_real(a), format_real(b));
  }
}

TEST(SpaceText, ExactFormat) {
  auto vocab = Vocabulary::from_counts({{"hi", 2}, {"yo", 1}});
  EmbeddingSpace s(vocab, 2, {0.1, -2.5, 1.0 / 3.0, 1e-12}, {}, "");
  std::ostringstream out;
  write_text_vectors(out, s);
  EXPECT_EQ(out.str(), "2 2\nhi 0.1 -2.5\nyo 0.333333333 1e-12\n");
  EXPECT_EQ(parse_text(out.str()).vocab().tokens(), vocab.tokens());
}

TEST(SpaceText, MalformedInputsReportLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_text(text);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("2\n"), 1u);
  EXPECT_EQ(line_of("2 x\n"), 1u);
  EXPECT_EQ(line_of("2 2\na 1 2\nb 1\n"), 3u);
  EXPECT_EQ(line_of("2 2\na 1 2\nb 1 zz\n"), 3u);
  EXPECT_EQ(line_of("1 2\na 1 2\nb 1 2\n"), 3u);
  EXPECT_EQ(line_of("3 2\na 1 2\nb 1 2\n"), 3u);
}

TEST(Sidecar, LayoutAndCorruption) {
  auto vocab = Vocabulary::from_counts({{"a", 1}});
  EmbeddingSpace s(vocab, 2, {1.0, -0.5}, {}, "");
  std::ostringstream out;
  write_sidecar(out, s);
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 4u + 1 + 8 + 8 + 1 + 16);
  EXPECT_EQ(bytes.substr(0, 4), "DVLX");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 1u);  // rows, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[13]), 2u);  // dimension
  EXPECT_EQ(bytes[21], 0);
  // 1.0 = 0x3FF0000000000000, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[22 + 7]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[22 + 6]), 0xF0u);

  auto fails = [](std::string b) {
    std::istringstream in(b);
    EXPECT_THROW(read_sidecar(in, "x.bin"), FormatError);
  };
  fails("DVLY" + bytes.substr(4));
  fails(bytes.substr(0, bytes.size() - 1));
  fails(bytes + "x");
  auto bumped = bytes;
  bumped[4] = 2;
  fails(bumped);
}

TEST_F(SpaceIo, MissingVocabularyFileIsAnError) {
  auto space = random_space(5, 3, 3);
  const auto path = dir_ / "v.vec";
  save_space(space, path);
  fs::remove(vocab_path(path));
  EXPECT_THROW(load_space(path), FormatError);
  EXPECT_THROW(load_space(dir_ / "absent.vec"), DataError);
}
