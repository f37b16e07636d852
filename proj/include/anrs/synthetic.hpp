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

#ifndef ANRS_SYNTHETIC_HPP_
#define ANRS_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anrs/config.hpp"
#include "anrs/corpus.hpp"

namespace anrs {

// Generated MIND-style corpus: disjoint word clusters, news written mostly
// from one cluster, users who click news of their preferred cluster.
struct SyntheticOptions {
  std::size_t clusters = 2;
  std::size_t words_per_cluster = 200;
  std::size_t news = 500;
  std::size_t users = 200;
  std::size_t dim = 300;
  std::size_t title_min = 6;
  std::size_t title_max = 12;
  std::size_t abstract_min = 10;
  std::size_t abstract_max = 20;
  std::size_t categories = 4;  // assigned independently of the cluster
  std::size_t history = 10;
  std::size_t train_impressions = 5;  // per user
  std::size_t test_impressions = 2;   // per user
  std::size_t candidates = 6;         // per impression
  double off_cluster_words = 0.1;     // share of words from another cluster
  double label_noise = 0.05;          // chance a candidate ignores the preference
  double center_scale = 0.3;          // per-coordinate std of cluster centers
  double word_spread = 0.3;           // per-coordinate std around the center
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  std::vector<NewsText> news;
  std::vector<ImpressionRecord> train;
  std::vector<ImpressionRecord> test;
  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;  // one per word
  std::vector<std::size_t> news_cluster;
};

SyntheticCorpus GenerateSynthetic(const SyntheticOptions& options);

// Cluster of a generated word ("c<cluster>w<index>"), or -1.
int SyntheticWordCluster(std::string_view word);

struct SyntheticPaths {
  std::filesystem::path train_news;
  std::filesystem::path train_behaviors;
  std::filesystem::path test_news;
  std::filesystem::path test_behaviors;
  std::filesystem::path embeddings;
};

// Writes news/behaviors TSVs and a whitespace embedding file under `dir`.
SyntheticPaths WriteSynthetic(const SyntheticCorpus& corpus,
                              const std::filesystem::path& dir);

// Points the data paths of `config` at the written files.
void UseSyntheticPaths(Config& config, const SyntheticPaths& paths);

}  // namespace anrs

#endif  // ANRS_SYNTHETIC_HPP_
