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

#include "anrs/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "anrs/errors.hpp"

#ifndef ANRS_SOURCE_DIR
#error "ANRS_SOURCE_DIR must be defined"
#endif

namespace anrs {
namespace {

TEST(ConfigTest, CompiledDefaultsMatchModelSettings) {
  const Config c;
  EXPECT_EQ(c.word_dim, 300u);
  EXPECT_EQ(c.filters, 400u);
  EXPECT_EQ(c.window, 5u);
  EXPECT_EQ(c.neg_ratio, 6u);
  EXPECT_EQ(c.batch_size, 256u);
  EXPECT_DOUBLE_EQ(c.dropout, 0.2);
  EXPECT_EQ(c.aspects, 40u);
  EXPECT_EQ(c.category_dim, 100u);
  EXPECT_EQ(c.title_len, 30u);
  EXPECT_EQ(c.abstract_len, 60u);
  EXPECT_EQ(c.history_len, 50u);
  EXPECT_DOUBLE_EQ(c.lambda, 1.0);
  EXPECT_DOUBLE_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.epochs, 5u);
  EXPECT_TRUE(c.aspects_enabled);
  EXPECT_TRUE(c.views.title && c.views.abstract && c.views.category);
}

TEST(ConfigTest, ShippedDefaultFileEqualsBuiltInDefaults) {
  const Config shipped = LoadConfig(std::filesystem::path(ANRS_SOURCE_DIR) /
                                    "configs" / "default.conf");
  EXPECT_EQ(shipped, Config{});
}

TEST(ConfigTest, DumpParseRoundTrip) {
  Config c;
  c.train_news = "/data/news.tsv";
  c.dropout = 0.123456789012345;
  c.learning_rate = 3e-5;
  c.views = ParseViews("title,category");
  c.aspects_enabled = false;
  c.seed = 1234567890123ULL;
  EXPECT_EQ(ParseConfig(DumpConfig(c)), c);
}

TEST(ConfigTest, CommentsAndBlankLinesAreIgnored) {
  const Config c = ParseConfig("# header\n\n  filters = 32  # inline\nwindow=3\n");
  EXPECT_EQ(c.filters, 32u);
  EXPECT_EQ(c.window, 3u);
}

TEST(ConfigTest, UnknownKeyAndBadValueAreInputErrors) {
  EXPECT_THROW(ParseConfig("no_such_key = 1\n"), InputError);
  EXPECT_THROW(ParseConfig("filters = many\n"), InputError);
  EXPECT_THROW(ParseConfig("filters\n"), InputError);
  EXPECT_THROW(ParseConfig("aspects_enabled = maybe\n"), InputError);
}

TEST(ConfigTest, ViewsParsing) {
  const InputViews v = ParseViews("abstract, title");
  EXPECT_TRUE(v.title);
  EXPECT_TRUE(v.abstract);
  EXPECT_FALSE(v.category);
  EXPECT_EQ(ViewsToString(v), "title,abstract");
  EXPECT_THROW(ParseViews("body"), InputError);
  EXPECT_THROW(ParseViews(""), InputError);
}

TEST(ConfigTest, ValidationRejectsBadValues) {
  Config c;
  c.window = 4;
  EXPECT_THROW(ValidateConfig(c), InputError);
  c = Config{};
  c.filters = 0;
  EXPECT_THROW(ValidateConfig(c), InputError);
  c = Config{};
  c.dropout = 1.0;
  EXPECT_THROW(ValidateConfig(c), InputError);
  EXPECT_NO_THROW(ValidateConfig(Config{}));
}

TEST(ConfigTest, PreprocessHashTracksOnlyPreprocessingKeys) {
  const Config base;
  Config training_only = base;
  training_only.seed = 99;
  training_only.learning_rate = 0.5;
  training_only.aspects_enabled = false;
  EXPECT_EQ(PreprocessHash(base), PreprocessHash(training_only));
  Config other = base;
  other.title_len = 20;
  EXPECT_NE(PreprocessHash(base), PreprocessHash(other));
  other = base;
  other.train_news = "x.tsv";
  EXPECT_NE(PreprocessHash(base), PreprocessHash(other));
}

TEST(ConfigTest, EveryKeyRoundTripsThroughGetAndSet) {
  const Config base;
  for (const std::string& key : ConfigKeys()) {
    Config c;
    SetConfigValue(c, key, GetConfigValue(base, key));
    EXPECT_EQ(c, base) << key;
  }
}

}  // namespace
}  // namespace anrs
