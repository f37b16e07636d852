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

#ifndef ANRS_PIPELINE_HPP_
#define ANRS_PIPELINE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anrs/config.hpp"
#include "anrs/corpus.hpp"
#include "anrs/evaluation.hpp"
#include "anrs/synthetic.hpp"
#include "anrs/tensor.hpp"
#include "anrs/training.hpp"

namespace anrs {

struct Prepared {
  Corpus corpus;
  Tensor embeddings;  // vocab x word_dim
  CacheHeader header;
  bool cache_hit = false;
  std::size_t news_parsed = 0;
  std::size_t malformed_news = 0;
  std::size_t dropped_history = 0;
  double embedding_coverage = 0.0;
  std::vector<std::string> warnings;
};

// Fingerprint of the raw input files named by the config (contents and
// paths). Throws InputError for a missing file.
std::string InputFingerprint(const Config& config);
CacheHeader ExpectedCacheHeader(const Config& config);

std::filesystem::path CorpusCachePath(const Config& config);
std::filesystem::path EmbeddingCachePath(const Config& config);

// Parses the raw files and loads or draws the embedding table.
Prepared BuildPrepared(const Config& config);

// BuildPrepared plus the on-disk cache: a cache with the expected header is
// read back instead (cache_hit), otherwise it is rebuilt and written.
Prepared Preprocess(const Config& config);

// In-memory equivalent of BuildPrepared for a generated corpus (the same
// news serve as train and test news).
Prepared PrepareSynthetic(const SyntheticCorpus& corpus, const Config& config);

// Reads the cache written by Preprocess. Throws InputError when it is
// absent and CompatibilityError when it was built with other settings.
Prepared LoadPrepared(const Config& config);

struct ExperimentResult {
  TrainResult training;
  SampleStats samples;
  std::optional<MetricReport> test;  // best parameters on the test split
};

// Samples, initializes and trains, then evaluates the best parameters on
// the test impressions when there are any.
ExperimentResult RunExperiment(
    const Config& config, const Prepared& prepared,
    const std::function<void(const EpochLog&)>& on_epoch = {},
    const StepCallback& on_step = {});

// Exclusive advisory lock on <dir>/.lock, released on destruction or when
// the process exits. Throws InputError when another process holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace anrs

#endif  // ANRS_PIPELINE_HPP_
