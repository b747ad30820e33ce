#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "divergelex/corpus.hpp"
#include "divergelex/synth.hpp"
#include "divergelex/trainer.hpp"

using namespace divergelex;

namespace {

std::vector<TokenizedDocument> tokenized(const std::vector<LabeledDocument>& docs) {
  std::vector<TokenizedDocument> out;
  for (const auto& d : docs) out.push_back(*clean_document(d));
  return out;
}

std::vector<TokenizedDocument> alternating_corpus() {
  TokenizedDocument d{"x", {}};
  for (int i = 0; i < 5000; ++i) {
    d.tokens.push_back("a");
    d.tokens.push_back("b");
  }
  return {d};
}

std::vector<TokenizedDocument> two_topic_corpus() {
  synth::SynthSpec spec;
  spec.vocab_size = 200;
  spec.num_topics = 2;
  spec.planted_words = 0;
  spec.control_words = 0;
  spec.docs_per_group = 6000;
  spec.seed = 21;
  return tokenized(synth::generate(spec).corpus_1);
}

}  // namespace

TEST(TrainingConfig, Validation) {
  TrainingConfig c;
  EXPECT_NO_THROW(validate(c));
  auto bad = [](auto mutate) {
    TrainingConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), ConfigError);
  };
  bad([](TrainingConfig& c) { c.dimension = 1; });
  bad([](TrainingConfig& c) { c.window = 0; });
  bad([](TrainingConfig& c) { c.negatives = 0; });
  bad([](TrainingConfig& c) { c.epochs = 0; });
  bad([](TrainingConfig& c) { c.initial_learning_rate = 0; });
  bad([](TrainingConfig& c) { c.min_count = 0; });
  bad([](TrainingConfig& c) { c.subsample_threshold = -1; });
  bad([](TrainingConfig& c) { c.threads = 0; });
}

TEST(Train, RejectsBadCorpora) {
  TrainingConfig c;
  c.min_count = 1;
  EXPECT_THROW(train({}, c), DataError);
  std::vector<TokenizedDocument> short_doc{{"x", {"lonely"}}};
  EXPECT_THROW(train(short_doc, c), DataError);
  c.min_count = 6000;
  EXPECT_THROW(train(alternating_corpus(), c), EmptyVocabularyError);
}

TEST(Train, DivergingLearningRateIsReported) {
  TrainingConfig c;
  c.dimension = 8;
  c.min_count = 1;
  c.subsample_threshold = 0;
  c.initial_learning_rate = 1e300;
  EXPECT_THROW(train(alternating_corpus(), c), NonFiniteLossError);
}

TEST(Train, AlternatingWordsEndUpClose) {
  TrainingConfig c;
  c.dimension = 8;
  c.min_count = 1;
  for (std::uint64_t seed : {1, 2, 3}) {
    c.seed = seed;
    auto space = train(alternating_corpus(), c, "ab");
    EXPECT_GT(cosine_similarity(space.vector("a"), space.vector("b")), 0.8) << "seed " << seed;
  }
}

TEST(Train, DeterministicForFixedSeed) {
  TrainingConfig c;
  c.dimension = 16;
  c.epochs = 2;
  auto corpus = two_topic_corpus();
  auto first = train(corpus, c, "t");
  auto second = train(corpus, c, "t");
  EXPECT_EQ(first.vocab(), second.vocab());
  EXPECT_EQ(first.input_matrix(), second.input_matrix());
  EXPECT_EQ(first.output_matrix(), second.output_matrix());
  c.seed = 2;
  EXPECT_NE(train(corpus, c, "t").input_matrix(), first.input_matrix());
}

TEST(Train, SpaceInvariantsAndLossDecreases) {
  TrainingConfig c;
  c.dimension = 50;
  TrainingStats stats;
  auto corpus = two_topic_corpus();
  auto space = train(corpus, c, "t", &stats);
  EXPECT_EQ(space.input_matrix().size(), space.size() * space.dimension());
  EXPECT_EQ(space.tag(), "t");
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto v = space.vector(i);
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; }));
  }
  ASSERT_EQ(stats.epoch_loss.size(), c.epochs);
  for (std::size_t e = 1; e < stats.epoch_loss.size(); ++e) {
    EXPECT_LE(stats.epoch_loss[e], stats.epoch_loss[e - 1] * 1.01) << "epoch " << e + 1;
  }
  EXPECT_LT(stats.epoch_loss.back(), stats.epoch_loss.front());
}

TEST(Train, TopicStructureIsRecovered) {
  TrainingConfig c;
  c.dimension = 50;
  auto corpus = two_topic_corpus();
  auto space = train(corpus, c, "t");
  std::vector<std::size_t> topic_a, topic_b;
  for (std::size_t i = 0; i < space.size(); ++i) {
    (space.vocab().token(i).starts_with("t00") ? topic_a : topic_b).push_back(i);
  }
  ASSERT_GT(topic_a.size(), 50u);
  ASSERT_GT(topic_b.size(), 50u);
  std::mt19937_64 rng(5);
  int good = 0;
  const int triples = 5000;
  for (int t = 0; t < triples; ++t) {
    // Alternate which topic plays the anchor role.
    const auto& same = t % 2 ? topic_a : topic_b;
    const auto& other = t % 2 ? topic_b : topic_a;
    const auto w = same[rng() % same.size()];
    auto w2 = same[rng() % same.size()];
    while (w2 == w) w2 = same[rng() % same.size()];
    const auto x = other[rng() % other.size()];
    good += cosine_similarity(space.vector(w), space.vector(w2)) > cosine_similarity(space.vector(w), space.vector(x));
  }
  EXPECT_GE(good, static_cast<int>(0.95 * triples));
}

TEST(Train, ParallelModeProducesValidSpace) {
  TrainingConfig c;
  c.dimension = 20;
  c.epochs = 2;
  c.threads = 4;
  auto space = train(two_topic_corpus(), c, "t");
  for (double x : space.input_matrix()) ASSERT_TRUE(std::isfinite(x));
}

TEST(Train, KeepProbabilities) {
  auto v = Vocabulary::from_counts({{"hot", 9000}, {"cold", 1000}});
  auto keep = detail::keep_probabilities(v, 1e-2);
  // f(hot) = 0.9 -> keep sqrt(0.01 / 0.9); f(cold) = 0.1 -> keep sqrt(0.1)
  EXPECT_NEAR(keep[v.index_of("hot")], std::sqrt(0.01 / 0.9), 1e-15);
  EXPECT_NEAR(keep[v.index_of("cold")], std::sqrt(0.1), 1e-15);
  for (double k : detail::keep_probabilities(v, 0.0)) EXPECT_EQ(k, 1.0);
  for (double k : detail::keep_probabilities(v, 5.0)) EXPECT_EQ(k, 1.0);
}
