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

#include "anrs/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <random>

#include "anrs/errors.hpp"

namespace anrs {
namespace {

std::string WordName(std::size_t cluster, std::size_t index) {
  return "c" + std::to_string(cluster) + "w" + std::to_string(index);
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

SyntheticCorpus GenerateSynthetic(const SyntheticOptions& o) {
  if (o.clusters < 2 || o.words_per_cluster == 0 || o.news < o.clusters ||
      o.candidates < 2 || o.title_min == 0 || o.title_min > o.title_max ||
      o.abstract_min > o.abstract_max) {
    throw InputError("invalid synthetic corpus options");
  }
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> center(0.0, o.center_scale);
  std::normal_distribution<double> spread(0.0, o.word_spread);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  SyntheticCorpus c;
  for (std::size_t k = 0; k < o.clusters; ++k) {
    std::vector<double> mid(o.dim);
    for (double& v : mid) v = center(rng);
    for (std::size_t i = 0; i < o.words_per_cluster; ++i) {
      c.words.push_back(WordName(k, i));
      std::vector<double> vec(o.dim);
      for (std::size_t d = 0; d < o.dim; ++d) vec[d] = mid[d] + spread(rng);
      c.vectors.push_back(std::move(vec));
    }
  }

  auto draw_words = [&](std::size_t cluster, std::size_t lo, std::size_t hi) {
    std::vector<std::string> words;
    const std::size_t n = lo + uniform(hi - lo + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = cluster;
      if (unit(rng) < o.off_cluster_words) {
        k = (cluster + 1 + uniform(o.clusters - 1)) % o.clusters;
      }
      words.push_back(WordName(k, uniform(o.words_per_cluster)));
    }
    return words;
  };

  std::vector<std::vector<std::size_t>> by_cluster(o.clusters);
  for (std::size_t i = 0; i < o.news; ++i) {
    const std::size_t k = i % o.clusters;
    NewsText n;
    n.news_id = "N" + std::to_string(i + 1);
    n.category = "topic" + std::to_string(uniform(o.categories));
    n.subcategory = n.category + "sub" + std::to_string(uniform(2));
    n.title = draw_words(k, o.title_min, o.title_max);
    n.abstract = draw_words(k, o.abstract_min, o.abstract_max);
    c.news.push_back(std::move(n));
    c.news_cluster.push_back(k);
    by_cluster[k].push_back(i);
  }

  auto pick_from = [&](std::size_t cluster) {
    return by_cluster[cluster][uniform(by_cluster[cluster].size())];
  };
  auto other_cluster = [&](std::size_t k) {
    return (k + 1 + uniform(o.clusters - 1)) % o.clusters;
  };
  auto noisy = [&](std::size_t k) {
    return unit(rng) < o.label_noise ? other_cluster(k) : k;
  };

  std::size_t next_impression = 1;
  auto make_impressions = [&](std::size_t user, std::size_t pref,
                              const std::vector<std::string>& history,
                              std::size_t count,
                              std::vector<ImpressionRecord>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      ImpressionRecord imp;
      imp.impression_id = std::to_string(next_impression++);
      imp.user_id = "U" + std::to_string(user + 1);
      imp.time = "11/15/2019 8:00:00 AM";
      imp.history = history;
      const std::size_t positives = 1 + uniform(2);
      for (std::size_t j = 0; j < o.candidates; ++j) {
        const bool clicked = j < positives;
        const std::size_t k = clicked ? noisy(pref) : noisy(other_cluster(pref));
        imp.candidates.push_back({c.news[pick_from(k)].news_id, clicked});
      }
      std::shuffle(imp.candidates.begin(), imp.candidates.end(), rng);
      out.push_back(std::move(imp));
    }
  };

  for (std::size_t u = 0; u < o.users; ++u) {
    const std::size_t pref = u % o.clusters;
    std::vector<std::string> history;
    for (std::size_t h = 0; h < o.history; ++h) {
      history.push_back(c.news[pick_from(noisy(pref))].news_id);
    }
    make_impressions(u, pref, history, o.train_impressions, c.train);
    make_impressions(u, pref, history, o.test_impressions, c.test);
  }
  return c;
}

int SyntheticWordCluster(std::string_view word) {
  if (word.size() < 4 || word[0] != 'c') return -1;
  const auto w = word.find('w');
  if (w == std::string_view::npos) return -1;
  int cluster = -1;
  const auto [ptr, ec] =
      std::from_chars(word.data() + 1, word.data() + w, cluster);
  if (ec != std::errc() || ptr != word.data() + w) return -1;
  return cluster;
}

SyntheticPaths WriteSynthetic(const SyntheticCorpus& corpus,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SyntheticPaths paths{dir / "train_news.tsv", dir / "train_behaviors.tsv",
                       dir / "test_news.tsv", dir / "test_behaviors.tsv",
                       dir / "embeddings.txt"};
  for (const auto& path : {paths.train_news, paths.test_news}) {
    auto out = OpenOut(path);
    for (const NewsText& n : corpus.news) {
      out << n.news_id << '\t' << n.category << '\t' << n.subcategory << '\t'
          << Join(n.title) << '\t' << Join(n.abstract) << "\thttps://example.com/"
          << n.news_id << "\t[]\t[]\n";
    }
  }
  auto write_behaviors = [](const std::filesystem::path& path,
                            const std::vector<ImpressionRecord>& imps) {
    auto out = OpenOut(path);
    for (const ImpressionRecord& imp : imps) {
      out << imp.impression_id << '\t' << imp.user_id << '\t' << imp.time
          << '\t' << Join(imp.history) << '\t';
      for (std::size_t i = 0; i < imp.candidates.size(); ++i) {
        out << (i ? " " : "") << imp.candidates[i].news_id << '-'
            << imp.candidates[i].label;
      }
      out << '\n';
    }
  };
  write_behaviors(paths.train_behaviors, corpus.train);
  write_behaviors(paths.test_behaviors, corpus.test);
  auto out = OpenOut(paths.embeddings);
  out << std::setprecision(9);
  for (std::size_t i = 0; i < corpus.words.size(); ++i) {
    out << corpus.words[i];
    for (double v : corpus.vectors[i]) out << ' ' << v;
    out << '\n';
  }
  return paths;
}

void UseSyntheticPaths(Config& config, const SyntheticPaths& paths) {
  config.train_news = paths.train_news.string();
  config.train_behaviors = paths.train_behaviors.string();
  config.test_news = paths.test_news.string();
  config.test_behaviors = paths.test_behaviors.string();
  config.embeddings = paths.embeddings.string();
}

}  // namespace anrs
