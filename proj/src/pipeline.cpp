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

#include "anrs/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <iterator>

#include "anrs/checkpoint.hpp"
#include "anrs/errors.hpp"
#include "anrs/hash.hpp"

namespace anrs {
namespace {

std::uint64_t HashFile(const std::string& path, std::uint64_t hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing input file: " + path);
  hash = Fnv1a64(path, hash);
  std::string buffer(1 << 16, '\0');
  while (in.read(buffer.data(), static_cast<std::streamsize>(buffer.size())) ||
         in.gcount() > 0) {
    hash = Fnv1a64(std::string_view(buffer.data(),
                                    static_cast<std::size_t>(in.gcount())),
                   hash);
  }
  return hash;
}

std::vector<NewsText> ReadNews(const std::string& path, Prepared& out) {
  NewsParseResult parsed = ParseNewsFile(path);
  out.news_parsed += parsed.news.size();
  out.malformed_news += parsed.malformed;
  for (auto& w : parsed.warnings) out.warnings.push_back(std::move(w));
  return std::move(parsed.news);
}

}  // namespace

std::string InputFingerprint(const Config& config) {
  if (config.train_news.empty() || config.train_behaviors.empty()) {
    throw InputError("train_news and train_behaviors must be set");
  }
  std::uint64_t hash = kFnvOffset;
  for (const std::string* path :
       {&config.train_news, &config.train_behaviors, &config.test_news,
        &config.test_behaviors, &config.embeddings}) {
    hash = path->empty() ? Fnv1a64("-", hash) : HashFile(*path, hash);
  }
  return HashToHex(hash);
}

CacheHeader ExpectedCacheHeader(const Config& config) {
  CacheHeader header;
  header.config_hash = HashToHex(PreprocessHash(config));
  header.inputs = InputFingerprint(config);
  return header;
}

std::filesystem::path CorpusCachePath(const Config& config) {
  return std::filesystem::path(config.run_dir) / "cache" / "corpus.jsonl";
}

std::filesystem::path EmbeddingCachePath(const Config& config) {
  return std::filesystem::path(config.run_dir) / "cache" / "embeddings.bin";
}

Prepared BuildPrepared(const Config& config) {
  ValidateConfig(config);
  Prepared out;
  out.header = ExpectedCacheHeader(config);
  std::vector<NewsText> train_news = ReadNews(config.train_news, out);
  std::vector<NewsText> test_news;
  if (!config.test_news.empty()) test_news = ReadNews(config.test_news, out);
  auto train_imps = ParseBehaviorsFile(config.train_behaviors);
  std::vector<ImpressionRecord> test_imps;
  if (!config.test_behaviors.empty()) {
    test_imps = ParseBehaviorsFile(config.test_behaviors);
  }
  out.corpus = AssembleCorpus(train_news, test_news, std::move(train_imps),
                              std::move(test_imps), config,
                              &out.dropped_history);
  EmbeddingTable table =
      config.embeddings.empty()
          ? RandomEmbeddings(out.corpus.vocab, config.word_dim,
                             config.embedding_seed)
          : LoadPretrainedEmbeddings(config.embeddings, out.corpus.vocab,
                                     config.word_dim, config.embedding_seed);
  out.embeddings = std::move(table.weights);
  out.embedding_coverage = table.coverage;
  return out;
}

Prepared PrepareSynthetic(const SyntheticCorpus& corpus,
                          const Config& config) {
  ValidateConfig(config);
  Prepared out;
  out.news_parsed = corpus.news.size();
  out.corpus = AssembleCorpus(corpus.news, corpus.news, corpus.train,
                              corpus.test, config, &out.dropped_history);
  std::stringstream vectors;
  vectors << std::setprecision(17);
  for (std::size_t i = 0; i < corpus.words.size(); ++i) {
    vectors << corpus.words[i];
    for (double v : corpus.vectors[i]) vectors << ' ' << v;
    vectors << '\n';
  }
  EmbeddingTable table = LoadPretrainedEmbeddings(
      vectors, out.corpus.vocab, config.word_dim, config.embedding_seed);
  out.embeddings = std::move(table.weights);
  out.embedding_coverage = table.coverage;
  return out;
}

Prepared Preprocess(const Config& config) {
  const CacheHeader expected = ExpectedCacheHeader(config);
  const auto corpus_path = CorpusCachePath(config);
  const auto embedding_path = EmbeddingCachePath(config);
  if (std::filesystem::exists(corpus_path) &&
      std::filesystem::exists(embedding_path)) {
    std::ifstream in(corpus_path);
    try {
      if (ReadCacheHeader(in) == expected) {
        Prepared out = LoadPrepared(config);
        out.cache_hit = true;
        return out;
      }
    } catch (const CompatibilityError&) {
      // Stale format; rebuilt below.
    }
  }
  Prepared out = BuildPrepared(config);
  std::filesystem::create_directories(corpus_path.parent_path());
  const auto tmp = std::filesystem::path(corpus_path.string() + ".tmp");
  {
    std::ofstream cache(tmp);
    if (!cache) throw InputError("cannot write " + tmp.string());
    WriteCorpusCache(cache, out.corpus, out.header);
  }
  SaveTensor(embedding_path, out.embeddings);
  std::filesystem::rename(tmp, corpus_path);
  return out;
}

Prepared LoadPrepared(const Config& config) {
  const auto corpus_path = CorpusCachePath(config);
  std::ifstream in(corpus_path);
  if (!in) {
    throw InputError("no preprocessed cache at " + corpus_path.string() +
                     "; run preprocess first");
  }
  Prepared out;
  out.corpus = ReadCorpusCache(in, &out.header);
  const std::string expected = HashToHex(PreprocessHash(config));
  if (out.header.config_hash != expected) {
    throw CompatibilityError("cache was built with config hash " +
                             out.header.config_hash + ", current config has " +
                             expected + "; rerun preprocess");
  }
  out.embeddings = LoadTensor(EmbeddingCachePath(config));
  const Shape want{out.corpus.vocab.size(), config.word_dim};
  if (out.embeddings.shape() != want) {
    throw CompatibilityError("cached embedding table " +
                             ShapeToString(out.embeddings.shape()) +
                             " does not match " + ShapeToString(want));
  }
  out.news_parsed = out.corpus.news.size();
  return out;
}

ExperimentResult RunExperiment(
    const Config& config, const Prepared& prepared,
    const std::function<void(const EpochLog&)>& on_epoch,
    const StepCallback& on_step) {
  ValidateConfig(config);
  ExperimentResult result;
  const auto samples =
      MakeTrainingSamples(prepared.corpus, prepared.corpus.train,
                          config.neg_ratio, config.history_len, config.seed,
                          &result.samples);
  ModelParams params = InitModel(config, prepared.corpus, prepared.embeddings);
  result.training =
      Train(config, prepared.corpus, samples, params, on_epoch, on_step);
  if (!prepared.corpus.test.empty()) {
    result.test = Evaluate(result.training.best, config, prepared.corpus,
                           prepared.corpus.test);
  }
  return result;
}

RunLock::RunLock(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw InputError("cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw InputError("run directory " + dir.string() +
                     " is in use by another process");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  if (::ftruncate(fd_, 0) == 0) {
    [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace anrs
