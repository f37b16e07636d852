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

#ifndef ANRS_CONFIG_HPP_
#define ANRS_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace anrs {

// Which news inputs feed the view fusion. "category" covers both the
// category and the subcategory view.
struct InputViews {
  bool title = true;
  bool abstract = true;
  bool category = true;

  bool operator==(const InputViews&) const = default;
};

// Parses "title,abstract,category" (any nonempty subset, any order).
InputViews ParseViews(std::string_view text);
std::string ViewsToString(const InputViews& views);

// Every knob of preprocessing, the model and training.
struct Config {
  // Data and run layout.
  std::string train_news;
  std::string train_behaviors;
  std::string test_news;
  std::string test_behaviors;
  std::string embeddings;  // optional pretrained vectors
  std::string run_dir = "run";

  // Model dimensions.
  std::size_t word_dim = 300;
  std::size_t filters = 400;
  std::size_t window = 5;
  std::size_t category_dim = 100;
  std::size_t category_embedding_dim = 100;
  std::size_t attention_dim = 200;
  std::size_t aspects = 40;
  InputViews views;
  bool aspects_enabled = true;

  // Preprocessing.
  std::size_t title_len = 30;
  std::size_t abstract_len = 60;
  std::size_t history_len = 50;
  std::size_t min_count = 2;
  double validation_fraction = 0.1;
  // Seeds the N(0, 0.1^2) rows of words missing from the pretrained file.
  std::uint64_t embedding_seed = 7;

  // Training.
  std::size_t neg_ratio = 6;
  std::size_t aspect_negatives = 6;
  std::size_t batch_size = 256;
  double dropout = 0.2;
  double lambda = 1.0;
  double learning_rate = 1e-4;
  double clip_norm = 5.0;
  std::size_t epochs = 5;
  std::size_t kmeans_max_iterations = 100;
  double kmeans_tolerance = 1e-4;
  std::uint64_t seed = 42;
  bool deterministic = false;

  bool operator==(const Config&) const = default;
};

// Keys understood by SetConfigValue, in dump order.
const std::vector<std::string>& ConfigKeys();

// Sets one key from its textual value. Throws InputError on an unknown key
// or an unparsable value.
void SetConfigValue(Config& config, std::string_view key,
                    std::string_view value);
std::string GetConfigValue(const Config& config, std::string_view key);

// key = value lines; '#' starts a comment; blank lines ignored.
Config ParseConfig(std::string_view text);
Config LoadConfig(const std::filesystem::path& path);
// Every key, one per line, in a form ParseConfig reproduces exactly.
std::string DumpConfig(const Config& config);

// Throws InputError when a dimension is zero, the window is even, or a
// rate is out of range.
void ValidateConfig(const Config& config);

// Hash of the settings that determine the preprocessed cache.
std::uint64_t PreprocessHash(const Config& config);

}  // namespace anrs

#endif  // ANRS_CONFIG_HPP_
