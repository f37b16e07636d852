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

// Writes a two-cluster synthetic corpus in MIND format plus a config file
// pointing at it.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "anrs/config.hpp"
#include "anrs/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic clustered news corpus"};
  anrs::SyntheticOptions o;
  std::string out_dir = "synthetic";
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", o.seed, "generator seed");
  app.add_option("--news", o.news, "number of news");
  app.add_option("--users", o.users, "number of users");
  app.add_option("--clusters", o.clusters, "number of word clusters");
  app.add_option("--words-per-cluster", o.words_per_cluster);
  app.add_option("--dim", o.dim, "embedding width");
  app.add_option("--off-cluster", o.off_cluster_words,
                 "share of words drawn from another cluster");
  app.add_option("--label-noise", o.label_noise);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = anrs::GenerateSynthetic(o);
    const auto paths = anrs::WriteSynthetic(corpus, out_dir);
    anrs::Config config;
    anrs::UseSyntheticPaths(config, paths);
    config.word_dim = o.dim;
    config.run_dir = (std::filesystem::path(out_dir) / "run").string();
    const auto conf = std::filesystem::path(out_dir) / "synthetic.conf";
    std::ofstream(conf) << anrs::DumpConfig(config);
    std::cout << "wrote " << corpus.news.size() << " news, "
              << corpus.train.size() << " train and " << corpus.test.size()
              << " test impressions; config " << conf.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
