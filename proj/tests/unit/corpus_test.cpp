/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "anrs/corpus.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "anrs/errors.hpp"
#include "toy.hpp"

namespace anrs {
namespace {

std::string NewsLine(const std::string& id, const std::string& title,
                     const std::string& abstract = "",
                     const std::string& cat = "sports",
                     const std::string& sub = "golf") {
  return id + "\t" + cat + "\t" + sub + "\t" + title + "\t" + abstract +
         "\thttps://x\t[]\t[]\n";
}

NewsParseResult Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseNews(in, "news.tsv");
}

std::vector<ImpressionRecord> Behaviors(const std::string& text) {
  std::istringstream in(text);
  return ParseBehaviors(in, "behaviors.tsv");
}

TEST(TokenizeTest, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(Tokenize("The Bears' 3-point WIN!"),
            (std::vector<std::string>{"the", "bears", "3", "point", "win"}));
  EXPECT_TRUE(Tokenize("  ... ").empty());
}

TEST(TokenizeTest, KeepsUtf8Bytes) {
  EXPECT_EQ(Tokenize("Café Ünïted"),
            (std::vector<std::string>{"café", "Ünïted"}));
}

TEST(ParseNewsTest, ReadsColumns) {
  const auto r = Parse(NewsLine("N1", "Big Game Tonight", "An abstract."));
  ASSERT_EQ(r.news.size(), 1u);
  EXPECT_EQ(r.news[0].news_id, "N1");
  EXPECT_EQ(r.news[0].category, "sports");
  EXPECT_EQ(r.news[0].title,
            (std::vector<std::string>{"big", "game", "tonight"}));
  EXPECT_EQ(r.news[0].abstract, (std::vector<std::string>{"an", "abstract"}));
}

TEST(ParseNewsTest, OneMalformedLineAmongThreeIsSkippedWithWarning) {
  const auto r = Parse(NewsLine("N1", "a b") + "N2\tbroken\n" +
                       NewsLine("N3", "c d"));
  EXPECT_EQ(r.news.size(), 2u);
  EXPECT_EQ(r.malformed, 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("news.tsv:2"), std::string::npos);
}

TEST(ParseNewsTest, ManyMalformedLinesFail) {
  EXPECT_THROW(Parse(NewsLine("N1", "a") + "bad\nbad\n"), InputError);
}

TEST(ParseNewsTest, MalformedShareUnderOnePercentIsTolerated) {
  std::string text;
  for (int i = 0; i < 300; ++i) text += NewsLine("N" + std::to_string(i), "w");
  text += "bad\nbad\n";
  const auto r = Parse(text);
  EXPECT_EQ(r.news.size(), 300u);
  EXPECT_EQ(r.malformed, 2u);
}

TEST(ParseBehaviorsTest, ReadsHistoryAndLabels) {
  const auto imps = Behaviors("7\tU1\t11/11/2019 9:05:58 AM\tN1 N2\tN3-1 N4-0\n");
  ASSERT_EQ(imps.size(), 1u);
  EXPECT_EQ(imps[0].impression_id, "7");
  EXPECT_EQ(imps[0].history, (std::vector<std::string>{"N1", "N2"}));
  ASSERT_EQ(imps[0].candidates.size(), 2u);
  EXPECT_EQ(imps[0].candidates[0], (Candidate{"N3", 1}));
  EXPECT_EQ(imps[0].candidates[1], (Candidate{"N4", 0}));
}

TEST(ParseBehaviorsTest, EmptyHistoryIsAllowed) {
  const auto imps = Behaviors("1\tU1\tt\t\tN3-1\n");
  ASSERT_EQ(imps.size(), 1u);
  EXPECT_TRUE(imps[0].history.empty());
}

TEST(ParseBehaviorsTest, ErrorsNameTheLine) {
  const std::string good = "1\tU1\tt\tN1\tN3-1 N4-0\n";
  for (const std::string& bad :
       {std::string("2\tU1\tt\tN1\tN3-2\n"), std::string("2\tU1\tt\tN1\n"),
        std::string("2\tU1\tt\tN1\t\n"), std::string("2\tU1\tt\tN1\tN3\n")}) {
    try {
      Behaviors(good + bad);
      FAIL() << "accepted " << bad;
    } catch (const InputError& e) {
      EXPECT_NE(std::string(e.what()).find("behaviors.tsv:2"),
                std::string::npos)
          << e.what();
    }
  }
}

TEST(ParseBehaviorsTest, CountClicks) {
  const auto imps = Behaviors("1\tU\tt\t\tA-1 B-1 C-0\n2\tU\tt\t\tA-0 D-1\n");
  EXPECT_EQ(CountClicks(imps), 3u);
}

TEST(VocabularyTest, FrequencyThenLexicographicOrder) {
  std::vector<NewsText> news(2);
  news[0].title = {"b", "a", "c", "c"};
  news[1].title = {"a", "d"};
  news[0].category = news[1].category = "x";
  const Vocabulary v = BuildVocabulary(news, 1);
  EXPECT_EQ(v.Word(0), "<pad>");
  EXPECT_EQ(v.Word(1), "<unk>");
  EXPECT_EQ(v.Word(2), "a");  // 2 uses, before c by lexicographic order
  EXPECT_EQ(v.Word(3), "c");
  EXPECT_EQ(v.Word(4), "x");
  EXPECT_EQ(v.Lookup("zzz"), kUnkId);
  EXPECT_EQ(v.Lookup("<pad>"), kUnkId);
}

TEST(VocabularyTest, MinCountDropsRareWords) {
  std::vector<NewsText> news(1);
  news[0].title = {"a", "a", "b"};
  const Vocabulary v = BuildVocabulary(news, 2);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.Lookup("b"), kUnkId);
}

TEST(VocabularyTest, HashDependsOnWordsAndOrder) {
  EXPECT_EQ(Vocabulary({"<pad>", "<unk>", "a"}).Hash(),
            Vocabulary({"<pad>", "<unk>", "a"}).Hash());
  EXPECT_NE(Vocabulary({"<pad>", "<unk>", "a", "b"}).Hash(),
            Vocabulary({"<pad>", "<unk>", "b", "a"}).Hash());
}

TEST(NewsRecordTest, PadsAndTruncates) {
  const Vocabulary vocab({"<pad>", "<unk>", "a", "b"});
  CategoryTable cats, subs;
  cats.Intern("news");
  NewsText text{"N1", "news", "unseen", {"a", "b", "zz", "a"}, {"b"}};
  const NewsRecord r = MakeNewsRecord(text, vocab, cats, subs, 3, 4);
  EXPECT_EQ(r.title_tokens, (std::vector<TokenId>{2, 3, kUnkId}));
  EXPECT_EQ(r.abstract_tokens, (std::vector<TokenId>{3, 0, 0, 0}));
  EXPECT_EQ(r.category, 1);
  EXPECT_EQ(r.subcategory, 0);
  EXPECT_EQ(RealTokens(r.abstract_tokens), (std::vector<TokenId>{3}));
}

TEST(SplitTest, ValidationShareIsStableAndCloseToFraction) {
  std::size_t hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::string id = std::to_string(i);
    EXPECT_EQ(InValidationSplit(id, 0.1), InValidationSplit(id, 0.1));
    hits += InValidationSplit(id, 0.1);
  }
  EXPECT_NEAR(hits / 20000.0, 0.1, 0.01);
  EXPECT_FALSE(InValidationSplit("123", 0.0));
}

TEST(AssembleTest, UnknownCandidateFailsAndUnknownHistoryIsDropped) {
  std::vector<NewsText> news{{"N1", "c", "s", {"a"}, {}},
                             {"N2", "c", "s", {"b"}, {}}};
  Config config;
  config.min_count = 1;
  config.validation_fraction = 0.0;
  std::size_t dropped = 0;
  const Corpus corpus = AssembleCorpus(
      news, {}, Behaviors("1\tU\tt\tN1 N9\tN2-1 N1-0\n"), {}, config, &dropped);
  EXPECT_EQ(dropped, 1u);
  EXPECT_EQ(corpus.train[0].history, (std::vector<std::string>{"N1"}));
  EXPECT_THROW(AssembleCorpus(news, {}, Behaviors("1\tU\tt\t\tN7-1\n"), {},
                              config),
               InputError);
}

TEST(EmbeddingTest, LoadsKnownWordsAndDrawsTheRest) {
  const Vocabulary vocab({"<pad>", "<unk>", "a", "b"});
  std::istringstream in("a 1 2 3\nzz 9 9 9\n");
  const EmbeddingTable t = LoadPretrainedEmbeddings(in, vocab, 3, 1);
  EXPECT_EQ(t.weights.shape(), (Shape{4, 3}));
  EXPECT_EQ(t.weights.at(2, 1), 2.0);
  for (double v : t.weights.row(0)) EXPECT_EQ(v, 0.0);
  EXPECT_NE(t.weights.at(3, 0), 0.0);
  EXPECT_DOUBLE_EQ(t.coverage, 0.5);
}

TEST(EmbeddingTest, DimensionMismatchIsInputError) {
  const Vocabulary vocab({"<pad>", "<unk>", "a"});
  std::istringstream in("a 1 2\n");
  EXPECT_THROW(LoadPretrainedEmbeddings(in, vocab, 3, 1), InputError);
}

TEST(EmbeddingTest, RandomRowsHaveConfiguredSpread) {
  std::vector<std::string> words{"<pad>", "<unk>"};
  for (int i = 0; i < 500; ++i) words.push_back("w" + std::to_string(i));
  const EmbeddingTable t = RandomEmbeddings(Vocabulary(words), 20, 3);
  double sq = 0.0;
  for (std::size_t i = 20; i < t.weights.size(); ++i) sq += t.weights[i] * t.weights[i];
  EXPECT_NEAR(std::sqrt(sq / (t.weights.size() - 20)), 0.1, 0.005);
}

TEST(SamplesTest, NegativesComeFromTheSameImpression) {
  Config config = testing::ToyConfig();
  const Prepared p = testing::ToyPrepared(config);
  SampleStats stats;
  const auto samples =
      MakeTrainingSamples(p.corpus, p.corpus.train, 2, 2, 5, &stats);
  EXPECT_EQ(samples.size(), stats.samples);
  EXPECT_EQ(samples.size(), CountClicks(p.corpus.train));
  std::size_t at = 0;
  for (const ImpressionRecord& imp : p.corpus.train) {
    std::set<std::size_t> negatives;
    for (const Candidate& c : imp.candidates) {
      if (c.label == 0) negatives.insert(p.corpus.Require(c.news_id));
    }
    for (std::size_t k = 0; k < CountClicks(std::span(&imp, 1)); ++k, ++at) {
      const TrainingSample& s = samples[at];
      EXPECT_EQ(s.negatives.size(), 2u);
      for (std::size_t n : s.negatives) EXPECT_TRUE(negatives.count(n));
      EXPECT_LE(s.history.size(), 2u);
    }
  }
}

TEST(SamplesTest, ImpressionWithoutNegativesIsSkipped) {
  std::vector<NewsText> news{{"N1", "c", "s", {"a"}, {}}};
  Config config;
  config.min_count = 1;
  config.validation_fraction = 0.0;
  const Corpus corpus =
      AssembleCorpus(news, {}, Behaviors("1\tU\tt\t\tN1-1\n"), {}, config);
  SampleStats stats;
  EXPECT_TRUE(MakeTrainingSamples(corpus, corpus.train, 2, 5, 1, &stats).empty());
  EXPECT_EQ(stats.skipped_without_negatives, 1u);
}

TEST(SamplesTest, DeterministicForSeed) {
  const Prepared p = testing::ToyPrepared(testing::ToyConfig());
  EXPECT_EQ(MakeTrainingSamples(p.corpus, p.corpus.train, 3, 2, 9),
            MakeTrainingSamples(p.corpus, p.corpus.train, 3, 2, 9));
}

TEST(CacheTest, RoundTripPreservesCorpus) {
  const Prepared p = testing::ToyPrepared(testing::ToyConfig());
  CacheHeader header{kCacheFormatVersion, "abc", "def"};
  std::stringstream buffer;
  WriteCorpusCache(buffer, p.corpus, header);
  CacheHeader read_header;
  const Corpus back = ReadCorpusCache(buffer, &read_header);
  EXPECT_EQ(read_header, header);
  EXPECT_EQ(back.vocab.Hash(), p.corpus.vocab.Hash());
  EXPECT_EQ(back.news, p.corpus.news);
  EXPECT_EQ(back.train, p.corpus.train);
  EXPECT_EQ(back.valid, p.corpus.valid);
  EXPECT_EQ(back.test, p.corpus.test);
  EXPECT_EQ(back.categories.names(), p.corpus.categories.names());
}

TEST(CacheTest, OtherVersionIsCompatibilityError) {
  std::stringstream buffer(
      "{\"format\":\"anrs-corpus\",\"version\":99,\"config_hash\":\"x\","
      "\"inputs\":\"y\"}\n");
  EXPECT_THROW(ReadCacheHeader(buffer), CompatibilityError);
  std::stringstream foreign("{\"format\":\"other\"}\n");
  EXPECT_THROW(ReadCacheHeader(foreign), CompatibilityError);
}

}  // namespace
}  // namespace anrs
