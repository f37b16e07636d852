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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "anrs/errors.hpp"
#include "anrs/hash.hpp"

namespace anrs {
namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::vector<std::string_view> SplitSpaces(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

void StripCr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool IsWordByte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

std::vector<TokenId> Padded(const std::vector<std::string>& words,
                            const Vocabulary& vocab, std::size_t length) {
  std::vector<TokenId> ids(length, kPadId);
  for (std::size_t i = 0; i < words.size() && i < length; ++i) {
    ids[i] = vocab.Lookup(words[i]);
  }
  return ids;
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (IsWordByte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"<pad>", "<unk>"}) {}

Vocabulary::Vocabulary(std::vector<std::string> words)
    : words_(std::move(words)) {
  if (words_.size() < 2) {
    throw InputError("vocabulary needs the padding and unknown entries");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    ids_.emplace(words_[i], static_cast<TokenId>(i));
  }
}

TokenId Vocabulary::Lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end() || it->second < 2) return kUnkId;
  return it->second;
}

std::uint64_t Vocabulary::Hash() const {
  std::uint64_t h = kFnvOffset;
  for (const std::string& w : words_) {
    h = Fnv1a64(w, h);
    h = Fnv1a64("\n", h);
  }
  return h;
}

NewsParseResult ParseNews(std::istream& in, const std::string& source) {
  NewsParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    StripCr(line);
    ++result.lines;
    const auto cols = SplitTabs(line);
    if (cols.size() < 7 || cols[0].empty()) {
      ++result.malformed;
      result.warnings.push_back(source + ":" + std::to_string(result.lines) +
                                ": expected at least 7 tab-separated columns");
      continue;
    }
    NewsText news;
    news.news_id = std::string(cols[0]);
    news.category = std::string(cols[1]);
    news.subcategory = std::string(cols[2]);
    news.title = Tokenize(cols[3]);
    news.abstract = Tokenize(cols[4]);
    result.news.push_back(std::move(news));
  }
  if (result.malformed > 1 &&
      static_cast<double>(result.malformed) >
          0.01 * static_cast<double>(result.lines)) {
    throw InputError(source + ": " + std::to_string(result.malformed) +
                     " of " + std::to_string(result.lines) +
                     " lines are malformed; first: " + result.warnings.front());
  }
  return result;
}

NewsParseResult ParseNewsFile(const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  return ParseNews(in, path.string());
}

std::vector<ImpressionRecord> ParseBehaviors(std::istream& in,
                                             const std::string& source) {
  std::vector<ImpressionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    StripCr(line);
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw InputError(source + ":" + std::to_string(line_no) + ": " + what);
    };
    const auto cols = SplitTabs(line);
    if (cols.size() < 5) fail("expected 5 tab-separated columns");
    ImpressionRecord record;
    record.impression_id = std::string(cols[0]);
    record.user_id = std::string(cols[1]);
    record.time = std::string(cols[2]);
    for (std::string_view id : SplitSpaces(cols[3])) {
      record.history.emplace_back(id);
    }
    for (std::string_view item : SplitSpaces(cols[4])) {
      const auto dash = item.rfind('-');
      if (dash == std::string_view::npos || dash == 0 ||
          dash + 2 != item.size() ||
          (item[dash + 1] != '0' && item[dash + 1] != '1')) {
        fail("candidate '" + std::string(item) + "' lacks a -0/-1 label");
      }
      record.candidates.push_back(
          Candidate{std::string(item.substr(0, dash)), item[dash + 1] - '0'});
    }
    if (record.candidates.empty()) fail("impression without candidates");
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<ImpressionRecord> ParseBehaviorsFile(
    const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  return ParseBehaviors(in, path.string());
}

std::size_t CountClicks(std::span<const ImpressionRecord> impressions) {
  std::size_t clicks = 0;
  for (const auto& imp : impressions) {
    for (const auto& c : imp.candidates) clicks += c.label == 1;
  }
  return clicks;
}

Vocabulary BuildVocabulary(std::span<const NewsText> news,
                           std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const NewsText& n : news) {
    for (const auto& w : n.title) ++counts[w];
    for (const auto& w : n.abstract) ++counts[w];
    for (const auto& w : Tokenize(n.category)) ++counts[w];
    for (const auto& w : Tokenize(n.subcategory)) ++counts[w];
  }
  if (counts.empty()) throw InputError("cannot build a vocabulary: no words");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [word, count] : counts) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  // std::map iteration is lexicographic, so a stable sort by count keeps
  // the lexicographic tiebreak.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> words{"<pad>", "<unk>"};
  for (auto& [word, count] : kept) words.push_back(word);
  return Vocabulary(std::move(words));
}

std::vector<TokenId> RealTokens(std::span<const TokenId> tokens) {
  std::vector<TokenId> out;
  for (TokenId t : tokens) {
    if (t != kPadId) out.push_back(t);
  }
  return out;
}

CategoryTable::CategoryTable() : CategoryTable(std::vector<std::string>{"<other>"}) {}

CategoryTable::CategoryTable(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) names_.push_back("<other>");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    ids_.emplace(names_[i], static_cast<std::int32_t>(i));
  }
}

std::int32_t CategoryTable::Intern(const std::string& name) {
  auto [it, inserted] =
      ids_.emplace(name, static_cast<std::int32_t>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::int32_t CategoryTable::Lookup(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? 0 : it->second;
}

std::optional<std::size_t> Corpus::IndexOf(const std::string& news_id) const {
  auto it = news_index.find(news_id);
  if (it == news_index.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::Require(const std::string& news_id) const {
  auto idx = IndexOf(news_id);
  if (!idx) throw InputError("unknown news id '" + news_id + "'");
  return *idx;
}

void Corpus::AddNews(NewsRecord record) {
  if (news_index.count(record.news_id)) return;
  news_index.emplace(record.news_id, news.size());
  news.push_back(std::move(record));
}

NewsRecord MakeNewsRecord(const NewsText& text, const Vocabulary& vocab,
                          const CategoryTable& categories,
                          const CategoryTable& subcategories,
                          std::size_t title_len, std::size_t abstract_len) {
  NewsRecord record;
  record.news_id = text.news_id;
  record.category = categories.Lookup(text.category);
  record.subcategory = subcategories.Lookup(text.subcategory);
  record.title_tokens = Padded(text.title, vocab, title_len);
  record.abstract_tokens = Padded(text.abstract, vocab, abstract_len);
  for (const auto& w : Tokenize(text.category)) {
    record.category_tokens.push_back(vocab.Lookup(w));
  }
  for (const auto& w : Tokenize(text.subcategory)) {
    record.category_tokens.push_back(vocab.Lookup(w));
  }
  return record;
}

bool InValidationSplit(const std::string& impression_id, double fraction) {
  return static_cast<double>(Fnv1a64(impression_id) % 10000) <
         fraction * 10000.0;
}

Corpus AssembleCorpus(std::span<const NewsText> train_news,
                      std::span<const NewsText> test_news,
                      std::vector<ImpressionRecord> train_impressions,
                      std::vector<ImpressionRecord> test_impressions,
                      const Config& config, std::size_t* dropped_history) {
  Corpus corpus;
  corpus.vocab = BuildVocabulary(train_news, config.min_count);
  for (const NewsText& n : train_news) {
    corpus.categories.Intern(n.category);
    corpus.subcategories.Intern(n.subcategory);
  }
  for (auto news : {train_news, test_news}) {
    for (const NewsText& n : news) {
      corpus.AddNews(MakeNewsRecord(n, corpus.vocab, corpus.categories,
                                    corpus.subcategories, config.title_len,
                                    config.abstract_len));
    }
  }
  std::size_t dropped = 0;
  auto check = [&](std::vector<ImpressionRecord>& impressions) {
    for (ImpressionRecord& imp : impressions) {
      for (const Candidate& c : imp.candidates) {
        if (!corpus.IndexOf(c.news_id)) {
          throw InputError("impression " + imp.impression_id +
                           " references unknown news '" + c.news_id + "'");
        }
      }
      std::erase_if(imp.history, [&](const std::string& id) {
        const bool unknown = !corpus.IndexOf(id);
        dropped += unknown;
        return unknown;
      });
    }
  };
  check(train_impressions);
  check(test_impressions);
  for (ImpressionRecord& imp : train_impressions) {
    if (InValidationSplit(imp.impression_id, config.validation_fraction)) {
      corpus.valid.push_back(std::move(imp));
    } else {
      corpus.train.push_back(std::move(imp));
    }
  }
  corpus.test = std::move(test_impressions);
  if (dropped_history) *dropped_history = dropped;
  return corpus;
}

EmbeddingTable RandomEmbeddings(const Vocabulary& vocab, std::size_t dim,
                                std::uint64_t seed) {
  EmbeddingTable table;
  table.weights = Tensor(Shape{vocab.size(), dim});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (std::size_t r = 1; r < vocab.size(); ++r) {
    for (double& v : table.weights.row(r)) v = normal(rng);
  }
  return table;
}

EmbeddingTable LoadPretrainedEmbeddings(std::istream& in,
                                        const Vocabulary& vocab,
                                        std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table = RandomEmbeddings(vocab, dim, seed);
  std::vector<bool> found(vocab.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    StripCr(line);
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const std::string word = line.substr(0, space);
    std::vector<double> values;
    values.reserve(dim);
    const char* p = space == std::string::npos ? line.data() + line.size()
                                               : line.data() + space;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw InputError("embeddings line " + std::to_string(line_no) +
                         ": cannot parse a number");
      }
      values.push_back(v);
      p = next;
    }
    if (values.size() != dim) {
      throw InputError("embeddings line " + std::to_string(line_no) + ": " +
                       std::to_string(values.size()) +
                       " dimensions, configured " + std::to_string(dim));
    }
    const TokenId id = vocab.Lookup(word);
    if (id == kUnkId || found[static_cast<std::size_t>(id)]) continue;
    found[static_cast<std::size_t>(id)] = true;
    std::copy(values.begin(), values.end(),
              table.weights.row(static_cast<std::size_t>(id)).begin());
  }
  const std::size_t regular = vocab.size() - 2;
  const auto hits = static_cast<std::size_t>(
      std::count(found.begin() + 2, found.end(), true));
  table.coverage =
      regular == 0 ? 0.0
                   : static_cast<double>(hits) / static_cast<double>(regular);
  return table;
}

EmbeddingTable LoadPretrainedEmbeddings(const std::filesystem::path& path,
                                        const Vocabulary& vocab,
                                        std::size_t dim, std::uint64_t seed) {
  std::ifstream in = OpenOrThrow(path);
  return LoadPretrainedEmbeddings(in, vocab, dim, seed);
}

std::vector<std::size_t> ResolveHistory(const Corpus& corpus,
                                        const ImpressionRecord& impression,
                                        std::size_t cap) {
  std::vector<std::size_t> history;
  for (const std::string& id : impression.history) {
    if (auto idx = corpus.IndexOf(id)) history.push_back(*idx);
  }
  if (history.size() > cap) {
    history.erase(history.begin(),
                  history.end() - static_cast<std::ptrdiff_t>(cap));
  }
  return history;
}

std::vector<TrainingSample> MakeTrainingSamples(
    const Corpus& corpus, std::span<const ImpressionRecord> impressions,
    std::size_t negatives, std::size_t history_cap, std::uint64_t seed,
    SampleStats* stats) {
  if (negatives == 0) throw InputError("negative sampling ratio must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<TrainingSample> samples;
  SampleStats local;
  for (const ImpressionRecord& imp : impressions) {
    std::vector<std::size_t> pos, neg;
    for (const Candidate& c : imp.candidates) {
      (c.label == 1 ? pos : neg).push_back(corpus.Require(c.news_id));
    }
    if (pos.empty()) continue;
    if (neg.empty()) {
      local.skipped_without_negatives += pos.size();
      continue;
    }
    const auto history = ResolveHistory(corpus, imp, history_cap);
    for (std::size_t p : pos) {
      TrainingSample sample;
      sample.history = history;
      sample.positive = p;
      if (neg.size() >= negatives) {
        std::vector<std::size_t> pool = neg;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(negatives);
        sample.negatives = std::move(pool);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, neg.size() - 1);
        for (std::size_t j = 0; j < negatives; ++j) {
          sample.negatives.push_back(neg[pick(rng)]);
        }
      }
      samples.push_back(std::move(sample));
    }
  }
  local.samples = samples.size();
  if (stats) *stats = local;
  return samples;
}

namespace {

using nlohmann::json;

json HeaderJson(const CacheHeader& header) {
  return json{{"format", "anrs-corpus"},
              {"version", header.version},
              {"config_hash", header.config_hash},
              {"inputs", header.inputs}};
}

CacheHeader ParseHeader(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw CompatibilityError(std::string("corpus cache header: ") + e.what());
  }
  if (j.value("format", "") != "anrs-corpus") {
    throw CompatibilityError("not an anrs corpus cache");
  }
  CacheHeader header;
  header.version = j.value("version", 0);
  if (header.version != kCacheFormatVersion) {
    throw CompatibilityError("corpus cache version " +
                             std::to_string(header.version) + ", expected " +
                             std::to_string(kCacheFormatVersion));
  }
  header.config_hash = j.value("config_hash", "");
  header.inputs = j.value("inputs", "");
  return header;
}

}  // namespace

void WriteCorpusCache(std::ostream& out, const Corpus& corpus,
                      const CacheHeader& header) {
  out << HeaderJson(header).dump() << '\n';
  out << json{{"vocab", corpus.vocab.words()}}.dump() << '\n';
  out << json{{"categories", corpus.categories.names()},
              {"subcategories", corpus.subcategories.names()}}
             .dump()
      << '\n';
  for (const NewsRecord& n : corpus.news) {
    out << json{{"news",
                 {{"id", n.news_id},
                  {"category", n.category},
                  {"subcategory", n.subcategory},
                  {"title", n.title_tokens},
                  {"abstract", n.abstract_tokens},
                  {"category_tokens", n.category_tokens}}}}
               .dump()
        << '\n';
  }
  auto write_split = [&out](const char* split,
                            const std::vector<ImpressionRecord>& imps) {
    for (const ImpressionRecord& imp : imps) {
      json candidates = json::array();
      for (const Candidate& c : imp.candidates) {
        candidates.push_back(json::array({c.news_id, c.label}));
      }
      out << json{{"impression",
                   {{"split", split},
                    {"id", imp.impression_id},
                    {"user", imp.user_id},
                    {"time", imp.time},
                    {"history", imp.history},
                    {"candidates", candidates}}}}
                 .dump()
          << '\n';
    }
  };
  write_split("train", corpus.train);
  write_split("valid", corpus.valid);
  write_split("test", corpus.test);
}

CacheHeader ReadCacheHeader(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CompatibilityError("empty corpus cache");
  return ParseHeader(line);
}

Corpus ReadCorpusCache(std::istream& in, CacheHeader* header) {
  const CacheHeader h = ReadCacheHeader(in);
  if (header) *header = h;
  Corpus corpus;
  std::string line;
  std::size_t line_no = 1;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (j.contains("vocab")) {
        corpus.vocab = Vocabulary(j["vocab"].get<std::vector<std::string>>());
      } else if (j.contains("categories")) {
        corpus.categories =
            CategoryTable(j["categories"].get<std::vector<std::string>>());
        corpus.subcategories =
            CategoryTable(j["subcategories"].get<std::vector<std::string>>());
      } else if (j.contains("news")) {
        const json& n = j["news"];
        NewsRecord r;
        r.news_id = n.at("id").get<std::string>();
        r.category = n.at("category").get<std::int32_t>();
        r.subcategory = n.at("subcategory").get<std::int32_t>();
        r.title_tokens = n.at("title").get<std::vector<TokenId>>();
        r.abstract_tokens = n.at("abstract").get<std::vector<TokenId>>();
        r.category_tokens = n.at("category_tokens").get<std::vector<TokenId>>();
        corpus.AddNews(std::move(r));
      } else if (j.contains("impression")) {
        const json& m = j["impression"];
        ImpressionRecord imp;
        imp.impression_id = m.at("id").get<std::string>();
        imp.user_id = m.at("user").get<std::string>();
        imp.time = m.at("time").get<std::string>();
        imp.history = m.at("history").get<std::vector<std::string>>();
        for (const json& c : m.at("candidates")) {
          imp.candidates.push_back(
              Candidate{c.at(0).get<std::string>(), c.at(1).get<int>()});
        }
        const std::string split = m.at("split").get<std::string>();
        if (split == "train") {
          corpus.train.push_back(std::move(imp));
        } else if (split == "valid") {
          corpus.valid.push_back(std::move(imp));
        } else {
          corpus.test.push_back(std::move(imp));
        }
      } else {
        throw InputError("unrecognized record");
      }
    }
  } catch (const json::exception& e) {
    throw InputError("corpus cache line " + std::to_string(line_no) + ": " +
                     e.what());
  }
  return corpus;
}

}  // namespace anrs
