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

#ifndef ANRS_CORPUS_HPP_
#define ANRS_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anrs/config.hpp"
#include "anrs/tensor.hpp"

namespace anrs {

using TokenId = std::int32_t;
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;

// Lowercases ASCII letters and splits on whitespace and punctuation; the
// separators themselves are dropped. Bytes >= 0x80 count as word characters
// so UTF-8 words stay intact.
std::vector<std::string> Tokenize(std::string_view text);

// Dense word ids. Id 0 is padding, id 1 the unknown word.
class Vocabulary {
 public:
  Vocabulary();
  // `words` must start with the padding and unknown entries.
  explicit Vocabulary(std::vector<std::string> words);

  TokenId Lookup(std::string_view word) const;
  const std::string& Word(TokenId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t Hash() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

// News line after tokenization, before words are mapped to ids.
struct NewsText {
  std::string news_id;
  std::string category;
  std::string subcategory;
  std::vector<std::string> title;
  std::vector<std::string> abstract;
};

struct NewsParseResult {
  std::vector<NewsText> news;
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::vector<std::string> warnings;
};

// MIND news.tsv: id, category, subcategory, title, abstract, url, entities...
// Lines with fewer than 7 columns or an empty id are skipped with a warning.
// Throws InputError when more than one line and more than 1% of the lines
// are malformed.
NewsParseResult ParseNews(std::istream& in, const std::string& source);
NewsParseResult ParseNewsFile(const std::filesystem::path& path);

struct Candidate {
  std::string news_id;
  int label = 0;

  bool operator==(const Candidate&) const = default;
};

struct ImpressionRecord {
  std::string impression_id;
  std::string user_id;
  std::string time;
  std::vector<std::string> history;  // oldest first
  std::vector<Candidate> candidates;

  bool operator==(const ImpressionRecord&) const = default;
};

// MIND behaviors.tsv: impression id, user id, time, space-separated history,
// space-separated "newsid-label" candidates. Throws InputError naming the
// line for a missing column, an empty candidate list, or a candidate without
// a -0/-1 suffix.
std::vector<ImpressionRecord> ParseBehaviors(std::istream& in,
                                             const std::string& source);
std::vector<ImpressionRecord> ParseBehaviorsFile(
    const std::filesystem::path& path);

std::size_t CountClicks(std::span<const ImpressionRecord> impressions);

// Words of titles, abstracts and category names. Words seen at least
// min_count times get ids ordered by descending frequency, then
// lexicographically. Throws InputError on an empty corpus.
Vocabulary BuildVocabulary(std::span<const NewsText> news,
                           std::size_t min_count);

struct NewsRecord {
  std::string news_id;
  std::int32_t category = 0;  // 0 is the reserved "other" category
  std::int32_t subcategory = 0;
  std::vector<TokenId> title_tokens;     // padded to title_len
  std::vector<TokenId> abstract_tokens;  // padded to abstract_len
  std::vector<TokenId> category_tokens;  // category then subcategory words

  bool operator==(const NewsRecord&) const = default;
};

// Non-padding ids of a padded sequence, in order.
std::vector<TokenId> RealTokens(std::span<const TokenId> tokens);

// Interned category names; index 0 is "<other>" for names never seen while
// building the table.
class CategoryTable {
 public:
  CategoryTable();
  explicit CategoryTable(std::vector<std::string> names);

  std::int32_t Intern(const std::string& name);
  std::int32_t Lookup(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct Corpus {
  Vocabulary vocab;
  CategoryTable categories;
  CategoryTable subcategories;
  std::vector<NewsRecord> news;
  std::unordered_map<std::string, std::size_t> news_index;
  std::vector<ImpressionRecord> train;
  std::vector<ImpressionRecord> valid;
  std::vector<ImpressionRecord> test;

  std::optional<std::size_t> IndexOf(const std::string& news_id) const;
  // Throws InputError for an unknown id.
  std::size_t Require(const std::string& news_id) const;
  void AddNews(NewsRecord record);
};

NewsRecord MakeNewsRecord(const NewsText& text, const Vocabulary& vocab,
                          const CategoryTable& categories,
                          const CategoryTable& subcategories,
                          std::size_t title_len, std::size_t abstract_len);

// True when the impression falls in the validation share, decided by a hash
// of its id so the split is stable across runs.
bool InValidationSplit(const std::string& impression_id, double fraction);

// Builds the vocabulary and category tables from the training news, maps all
// news to ids and splits training impressions into train/valid. Candidates
// referencing unknown news raise InputError; unknown history entries are
// dropped and counted in *dropped_history.
Corpus AssembleCorpus(std::span<const NewsText> train_news,
                      std::span<const NewsText> test_news,
                      std::vector<ImpressionRecord> train_impressions,
                      std::vector<ImpressionRecord> test_impressions,
                      const Config& config,
                      std::size_t* dropped_history = nullptr);

struct EmbeddingTable {
  Tensor weights;  // V x D, row 0 all zeros
  bool trainable = true;
  double coverage = 0.0;  // share of non-special words found in the file
};

// Rows not in the file are drawn from N(0, 0.1^2) with `seed`. Throws
// InputError when a line does not carry exactly `dim` values.
EmbeddingTable LoadPretrainedEmbeddings(const std::filesystem::path& path,
                                        const Vocabulary& vocab,
                                        std::size_t dim, std::uint64_t seed);
EmbeddingTable LoadPretrainedEmbeddings(std::istream& in,
                                        const Vocabulary& vocab,
                                        std::size_t dim, std::uint64_t seed);
EmbeddingTable RandomEmbeddings(const Vocabulary& vocab, std::size_t dim,
                                std::uint64_t seed);

struct TrainingSample {
  std::vector<std::size_t> history;  // indices into Corpus::news
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;

  bool operator==(const TrainingSample&) const = default;
};

struct SampleStats {
  std::size_t samples = 0;
  std::size_t skipped_without_negatives = 0;
};

// One sample per clicked candidate with `negatives` non-clicked candidates
// from the same impression: without replacement when enough exist, with
// replacement otherwise. History keeps the `history_cap` most recent items.
std::vector<TrainingSample> MakeTrainingSamples(
    const Corpus& corpus, std::span<const ImpressionRecord> impressions,
    std::size_t negatives, std::size_t history_cap, std::uint64_t seed,
    SampleStats* stats = nullptr);

// Most recent `cap` resolvable history entries as news indices.
std::vector<std::size_t> ResolveHistory(const Corpus& corpus,
                                        const ImpressionRecord& impression,
                                        std::size_t cap);

inline constexpr int kCacheFormatVersion = 1;

struct CacheHeader {
  int version = kCacheFormatVersion;
  std::string config_hash;
  std::string inputs;  // fingerprint of the raw input files

  bool operator==(const CacheHeader&) const = default;
};

// Line-delimited JSON: a header line, then vocabulary, categories, one line
// per news and one per impression.
void WriteCorpusCache(std::ostream& out, const Corpus& corpus,
                      const CacheHeader& header);
Corpus ReadCorpusCache(std::istream& in, CacheHeader* header = nullptr);
// Reads only the header line.
CacheHeader ReadCacheHeader(std::istream& in);

}  // namespace anrs

#endif  // ANRS_CORPUS_HPP_
