#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/corpus_io.hpp"
#include "divergelex/preprocess.hpp"

using namespace divergelex;

namespace {

using Tokens = std::vector<std::string>;

std::string join(const Tokens& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + t[i];
  return s;
}

TokenizedDocument doc(std::string tag, const std::string& text) {
  TokenizedDocument d{std::move(tag), {}};
  std::istringstream in(text);
  std::string w;
  while (in >> w) d.tokens.push_back(w);
  return d;
}

}  // namespace

TEST(Tokenize, StripsMentionsUrlsHashtags) {
  EXPECT_EQ(tokenize("@john Check THIS out https://t.co/xyz #cool"), (Tokens{"check", "this", "out"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, LowercasesAndStripsBoundaryPunctuation) {
  EXPECT_EQ(tokenize("It's A test, a TEST."), (Tokens{"it's", "a", "test", "a", "test"}));
}

TEST(Tokenize, UrlVariantsAndWrappedMarkers) {
  EXPECT_EQ(tokenize("see www.example.com HTTP://X.Y (http://a.b) (#tag) \"@who\" ok"), (Tokens{"see", "ok"}));
}

TEST(Tokenize, KeepsInteriorHyphensAndApostrophes) {
  EXPECT_EQ(tokenize("--well-known-- 'rock'n'roll' e-mail!!"), (Tokens{"well-known", "rock'n'roll", "e-mail"}));
}

TEST(Tokenize, PunctuationOnlyPiecesVanish) { EXPECT_TRUE(tokenize("... !!! -- ?").empty()); }

TEST(Tokenize, UnicodeWhitespaceAndCase) {
  // U+00A0 and U+3000 separate tokens; Latin-1 and Cyrillic capitals fold.
  EXPECT_EQ(tokenize("CAF\xC3\x89\xC2\xA0\xD0\x9C\xD0\x98\xD0\xA0\xE3\x80\x80ok\xE2\x80\xA6"),
            (Tokens{"caf\xC3\xA9", "\xD0\xBC\xD0\xB8\xD1\x80", "ok"}));
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pieces = {"Hello", "#tag", "@me", "www.x.org", "https://t.co/a", "it's",
                                           "--dash--", "(paren)", "WORLD!", "a-b", "\"quote\"", "..",
                                           "\xC3\x89t\xC3\xA9", "rt", "x@y.com", "'", "#", "@"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng() % 20);
    for (int i = 0; i < len; ++i) {
      text += pieces[rng() % pieces.size()];
      text += (rng() % 4 == 0) ? "\t" : " ";
    }
    const auto once = tokenize(text);
    EXPECT_EQ(tokenize(join(once)), once) << text;
    for (const auto& t : once) {
      EXPECT_FALSE(t.empty());
      EXPECT_EQ(utf8::lower(t), t);
    }
  }
}

TEST(CleanDocument, RetweetFlagDrops) {
  LabeledDocument d{"m", "one two three four five six seven eight nine ten eleven", true};
  EXPECT_FALSE(clean_document(d).has_value());
}

TEST(CleanDocument, InferredRetweetDrops) {
  LabeledDocument d{"m", "RT: one two three four five six seven eight nine ten eleven", std::nullopt};
  EXPECT_FALSE(clean_document(d).has_value());
  d.is_retweet = false;  // explicit flag wins over inference
  EXPECT_TRUE(clean_document(d).has_value());
}

TEST(CleanDocument, TenTokenBoundary) {
  LabeledDocument nine{"f", "a b c d e f g h i", std::nullopt};
  LabeledDocument ten{"f", "a b c d e f g h i j", std::nullopt};
  EXPECT_FALSE(clean_document(nine).has_value());
  auto kept = clean_document(ten);
  ASSERT_TRUE(kept.has_value());
  EXPECT_EQ(kept->group_tag, "f");
  EXPECT_EQ(kept->tokens.size(), 10u);
}

TEST(CleanDocument, FilterAppliesAfterCleaning) {
  // 15 raw pieces, 3 URLs and 3 markers leave 9 tokens.
  LabeledDocument d{"f", "a b c http://x d e https://y f #g @h g www.z #i h i", std::nullopt};
  EXPECT_EQ(tokenize(d.text).size(), 9u);
  EXPECT_FALSE(clean_document(d).has_value());
}

TEST(BuildVocabulary, ThresholdAndOrder) {
  std::vector<TokenizedDocument> docs{doc("m", "the cat the zq the"), doc("m", "cat the the")};
  auto v = build_vocabulary(docs, 2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.token(0), "the");
  EXPECT_EQ(v.token(1), "cat");
  EXPECT_EQ(v.count(0), 5u);
  EXPECT_EQ(v.count(1), 2u);
  EXPECT_EQ(v.total_tokens(), 7u);
  EXPECT_FALSE(v.contains("zq"));
}

TEST(BuildVocabulary, MinCountOneKeepsAll) {
  std::vector<TokenizedDocument> docs{doc("m", "the cat the zq the"), doc("m", "cat the the")};
  EXPECT_EQ(build_vocabulary(docs, 1).size(), 3u);
}

TEST(BuildVocabulary, LexicographicTieBreak) {
  std::vector<TokenizedDocument> docs{doc("m", "b a b a a b")};
  auto v = build_vocabulary(docs, 1);
  EXPECT_EQ(v.index_of("a"), 0u);
  EXPECT_EQ(v.index_of("b"), 1u);
}

TEST(BuildVocabulary, Errors) {
  std::vector<TokenizedDocument> docs{doc("m", "a b c")};
  EXPECT_THROW(build_vocabulary(docs, 2), EmptyVocabularyError);
  EXPECT_THROW(build_vocabulary(docs, 0), ConfigError);
  EXPECT_THROW(build_vocabulary({}, 1), EmptyVocabularyError);
}

TEST(BuildVocabulary, RandomizedInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenizedDocument> docs;
    std::map<std::string, std::uint64_t> truth;
    const int ndocs = 1 + static_cast<int>(rng() % 10);
    for (int d = 0; d < ndocs; ++d) {
      TokenizedDocument td{"g", {}};
      const int len = 1 + static_cast<int>(rng() % 30);
      for (int i = 0; i < len; ++i) {
        std::string w(1, static_cast<char>('a' + rng() % 12));
        if (rng() % 3 == 0) w += static_cast<char>('a' + rng() % 3);
        ++truth[w];
        td.tokens.push_back(w);
      }
      docs.push_back(td);
    }
    const std::uint64_t min_count = 1 + rng() % 4;
    std::size_t expected_size = 0;
    for (auto& [w, c] : truth) expected_size += c >= min_count;
    if (expected_size == 0) {
      EXPECT_THROW(build_vocabulary(docs, min_count), EmptyVocabularyError);
      continue;
    }
    auto v = build_vocabulary(docs, min_count);
    ASSERT_EQ(v.size(), expected_size);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(v.index_of(v.token(i)), i);
      EXPECT_EQ(v.count(i), truth[v.token(i)]);
      EXPECT_GE(v.count(i), min_count);
      if (i > 0) {
        const bool ordered = v.count(i - 1) > v.count(i) ||
                             (v.count(i - 1) == v.count(i) && v.token(i - 1) < v.token(i));
        EXPECT_TRUE(ordered);
      }
    }
  }
}

TEST(ApplyVocabulary, DeletesOovAndDropsUntrainable) {
  std::vector<TokenizedDocument> docs{doc("m", "the cat zq the"), doc("m", "zq cat zq"), doc("f", "zq zq")};
  auto v = build_vocabulary(std::vector<TokenizedDocument>{doc("m", "the cat")}, 1);
  auto out = apply_vocabulary(docs, v);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tokens, (Tokens{"the", "cat", "the"}));
  EXPECT_THROW(apply_vocabulary(docs, Vocabulary{}), EmptyVocabularyError);
}

TEST(SplitByGroup, PartitionsPreservingOrder) {
  std::vector<TokenizedDocument> docs{doc("m", "a b"), doc("f", "c d"), doc("m", "e f"), doc("f", "g h")};
  auto g = split_by_group(docs);
  EXPECT_EQ(g.tag(0), "m");
  EXPECT_EQ(g.tag(1), "f");
  ASSERT_EQ(g.group("m").size(), 2u);
  EXPECT_EQ(g.group("m")[1].tokens, (Tokens{"e", "f"}));
  EXPECT_EQ(g.combined_size(), 4u);

  auto combined = g.combined();
  auto key = [](const TokenizedDocument& d) { return d.group_tag + "|" + join(d.tokens); };
  std::vector<std::string> a, b;
  for (auto& d : combined) a.push_back(key(d));
  for (auto& d : docs) b.push_back(key(d));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(SplitByGroup, DeclaredOrder) {
  std::vector<TokenizedDocument> docs{doc("m", "a b"), doc("f", "c d")};
  auto g = split_by_group(docs, std::make_pair(std::string("f"), std::string("m")));
  EXPECT_EQ(g.tag(0), "f");
  EXPECT_THROW(split_by_group(docs, std::make_pair(std::string("f"), std::string("x"))), DataError);
}

TEST(SplitByGroup, RequiresExactlyTwoGroups) {
  std::vector<TokenizedDocument> one{doc("m", "a b")};
  std::vector<TokenizedDocument> three{doc("m", "a b"), doc("f", "a b"), doc("x", "a b")};
  EXPECT_THROW(split_by_group(one), GroupCountError);
  EXPECT_THROW(split_by_group(three), GroupCountError);
  EXPECT_THROW(split_by_group({}), GroupCountError);
}

TEST(Jsonl, ReadsRecordsAndCollectsMalformedLines) {
  std::istringstream in(
      "{\"group\":\"m\",\"text\":\"hello\"}\n"
      "\n"
      "{not json\n"
      "{\"group\":\"f\",\"text\":\"x\",\"retweet\":true}\n"
      "{\"group\":\"f\"}\n"
      "{\"group\":\"f\",\"text\":\"x\",\"retweet\":\"yes\"}\n"
      "[1,2]\n");
  auto batch = read_jsonl(in);
  ASSERT_EQ(batch.documents.size(), 2u);
  EXPECT_FALSE(batch.documents[0].is_retweet.has_value());
  EXPECT_TRUE(*batch.documents[1].is_retweet);
  ASSERT_EQ(batch.malformed.size(), 4u);
  EXPECT_EQ(batch.malformed[0].line, 3u);
  EXPECT_EQ(batch.malformed[1].line, 5u);
  EXPECT_EQ(batch.malformed[2].line, 6u);
  EXPECT_EQ(batch.malformed[3].line, 7u);
}

TEST(VocabularyFile, RoundTripAndErrors) {
  std::vector<TokenizedDocument> docs{doc("m", "b a b c a a")};
  auto v = build_vocabulary(docs, 1);
  std::ostringstream out;
  write_vocabulary(out, v);
  EXPECT_EQ(out.str(), "a\t3\nb\t2\nc\t1\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_vocabulary(in, "v"), v);

  std::istringstream bad("a\t3\nb two\n");
  try {
    read_vocabulary(bad, "v.tsv");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Preprocess, CountsEveryRule) {
  std::vector<LabeledDocument> recs{
      {"m", "one two three four five six seven eight nine ten", std::nullopt},
      {"f", "one two three four five six seven eight nine ten", std::nullopt},
      {"m", "rt one two three four five six seven eight nine ten", std::nullopt},
      {"f", "one two three", std::nullopt},
      {"f", "one two three four five six seven eight nine unique", std::nullopt},
  };
  auto r = preprocess(recs, 2);
  EXPECT_EQ(r.stats.retweets_dropped, 1u);
  EXPECT_EQ(r.stats.short_dropped, 1u);
  EXPECT_EQ(r.stats.rare_tokens_removed, 1u);
  EXPECT_EQ(r.stats.documents_out, 3u);
  EXPECT_EQ(r.corpus.group("f")[1].tokens.size(), 9u);
  EXPECT_EQ(r.vocabulary.count_of("one"), 3u);
  EXPECT_FALSE(r.vocabulary.contains("unique"));
}
