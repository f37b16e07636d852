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

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "anrs/errors.hpp"
#include "anrs/hash.hpp"

namespace anrs {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value) {
  throw InputError("config: bad value '" + std::string(value) + "' for key '" +
                   std::string(key) + "'");
}

std::size_t ParseSize(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value);
  }
  return out;
}

std::uint64_t ParseU64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value);
  }
  return out;
}

double ParseDouble(std::string_view key, std::string_view value) {
  std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    BadValue(key, value);
  }
  if (used != text.size()) BadValue(key, value);
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value);
}

std::string FormatDouble(double v) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

struct Field {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, std::string_view)> set;
};

template <typename T>
Field SizeField(T Config::*member, std::string key) {
  return Field{
      [member](const Config& c) { return std::to_string(c.*member); },
      [member, key](Config& c, std::string_view v) {
        c.*member = ParseSize(key, v);
      }};
}

Field DoubleField(double Config::*member, std::string key) {
  return Field{[member](const Config& c) { return FormatDouble(c.*member); },
               [member, key](Config& c, std::string_view v) {
                 c.*member = ParseDouble(key, v);
               }};
}

Field StringField(std::string Config::*member) {
  return Field{[member](const Config& c) { return c.*member; },
               [member](Config& c, std::string_view v) {
                 c.*member = std::string(v);
               }};
}

Field BoolField(bool Config::*member, std::string key) {
  return Field{
      [member](const Config& c) {
        return std::string(c.*member ? "true" : "false");
      },
      [member, key](Config& c, std::string_view v) {
        c.*member = ParseBool(key, v);
      }};
}

Field U64Field(std::uint64_t Config::*member, std::string key) {
  return Field{[member](const Config& c) { return std::to_string(c.*member); },
               [member, key](Config& c, std::string_view v) {
                 c.*member = ParseU64(key, v);
               }};
}

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const auto* fields = new std::vector<std::pair<std::string, Field>>{
      {"train_news", StringField(&Config::train_news)},
      {"train_behaviors", StringField(&Config::train_behaviors)},
      {"test_news", StringField(&Config::test_news)},
      {"test_behaviors", StringField(&Config::test_behaviors)},
      {"embeddings", StringField(&Config::embeddings)},
      {"run_dir", StringField(&Config::run_dir)},
      {"word_dim", SizeField(&Config::word_dim, "word_dim")},
      {"filters", SizeField(&Config::filters, "filters")},
      {"window", SizeField(&Config::window, "window")},
      {"category_dim", SizeField(&Config::category_dim, "category_dim")},
      {"category_embedding_dim",
       SizeField(&Config::category_embedding_dim, "category_embedding_dim")},
      {"attention_dim", SizeField(&Config::attention_dim, "attention_dim")},
      {"aspects", SizeField(&Config::aspects, "aspects")},
      {"views",
       Field{[](const Config& c) { return ViewsToString(c.views); },
             [](Config& c, std::string_view v) { c.views = ParseViews(v); }}},
      {"aspects_enabled",
       BoolField(&Config::aspects_enabled, "aspects_enabled")},
      {"title_len", SizeField(&Config::title_len, "title_len")},
      {"abstract_len", SizeField(&Config::abstract_len, "abstract_len")},
      {"history_len", SizeField(&Config::history_len, "history_len")},
      {"min_count", SizeField(&Config::min_count, "min_count")},
      {"validation_fraction",
       DoubleField(&Config::validation_fraction, "validation_fraction")},
      {"embedding_seed", U64Field(&Config::embedding_seed, "embedding_seed")},
      {"neg_ratio", SizeField(&Config::neg_ratio, "neg_ratio")},
      {"aspect_negatives",
       SizeField(&Config::aspect_negatives, "aspect_negatives")},
      {"batch_size", SizeField(&Config::batch_size, "batch_size")},
      {"dropout", DoubleField(&Config::dropout, "dropout")},
      {"lambda", DoubleField(&Config::lambda, "lambda")},
      {"learning_rate", DoubleField(&Config::learning_rate, "learning_rate")},
      {"clip_norm", DoubleField(&Config::clip_norm, "clip_norm")},
      {"epochs", SizeField(&Config::epochs, "epochs")},
      {"kmeans_max_iterations",
       SizeField(&Config::kmeans_max_iterations, "kmeans_max_iterations")},
      {"kmeans_tolerance",
       DoubleField(&Config::kmeans_tolerance, "kmeans_tolerance")},
      {"seed", U64Field(&Config::seed, "seed")},
      {"deterministic", BoolField(&Config::deterministic, "deterministic")},
  };
  return *fields;
}

const Field& FindField(std::string_view key) {
  for (const auto& [name, field] : Fields()) {
    if (name == key) return field;
  }
  throw InputError("config: unknown key '" + std::string(key) + "'");
}

}  // namespace

InputViews ParseViews(std::string_view text) {
  InputViews views{false, false, false};
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = Trim(rest.substr(0, comma));
    if (item == "title") {
      views.title = true;
    } else if (item == "abstract") {
      views.abstract = true;
    } else if (item == "category") {
      views.category = true;
    } else {
      throw InputError("unknown view '" + std::string(item) +
                       "' (expected title, abstract or category)");
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (!views.title && !views.abstract && !views.category) {
    throw InputError("views must name at least one of title, abstract, "
                     "category");
  }
  return views;
}

std::string ViewsToString(const InputViews& views) {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (views.title) add("title");
  if (views.abstract) add("abstract");
  if (views.category) add("category");
  return out;
}

const std::vector<std::string>& ConfigKeys() {
  static const auto* keys = [] {
    auto* out = new std::vector<std::string>();
    for (const auto& [name, field] : Fields()) out->push_back(name);
    return out;
  }();
  return *keys;
}

void SetConfigValue(Config& config, std::string_view key,
                    std::string_view value) {
  FindField(key).set(config, Trim(value));
}

std::string GetConfigValue(const Config& config, std::string_view key) {
  return FindField(key).get(config);
}

Config ParseConfig(std::string_view text) {
  Config config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    SetConfigValue(config, Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

Config LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

std::string DumpConfig(const Config& config) {
  std::string out;
  for (const auto& [name, field] : Fields()) {
    out += name + " = " + field.get(config) + "\n";
  }
  return out;
}

void ValidateConfig(const Config& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(c.word_dim > 0 && c.filters > 0 && c.category_dim > 0 &&
              c.category_embedding_dim > 0 && c.attention_dim > 0,
          "dimensions must be positive");
  require(c.window % 2 == 1, "window must be odd");
  require(c.aspects > 0, "aspects must be positive");
  require(c.title_len > 0 && c.abstract_len > 0 && c.history_len > 0,
          "sequence lengths must be positive");
  require(c.neg_ratio > 0, "neg_ratio must be positive");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.dropout >= 0.0 && c.dropout < 1.0, "dropout must be in [0, 1)");
  require(c.lambda >= 0.0, "lambda must be nonnegative");
  require(c.learning_rate > 0.0, "learning_rate must be positive");
  require(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0,
          "validation_fraction must be in [0, 1)");
  require(c.views.title || c.views.abstract || c.views.category,
          "views must be nonempty");
}

std::uint64_t PreprocessHash(const Config& config) {
  std::uint64_t h = kFnvOffset;
  for (const char* key :
       {"train_news", "train_behaviors", "test_news", "test_behaviors",
        "embeddings", "word_dim", "title_len", "abstract_len", "min_count",
        "validation_fraction", "embedding_seed"}) {
    h = Fnv1a64(key, h);
    h = Fnv1a64("=", h);
    h = Fnv1a64(GetConfigValue(config, key), h);
    h = Fnv1a64("\n", h);
  }
  return h;
}

std::string HashToHex(std::uint64_t hash) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

}  // namespace anrs
