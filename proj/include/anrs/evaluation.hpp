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

#ifndef ANRS_EVALUATION_HPP_
#define ANRS_EVALUATION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "anrs/config.hpp"
#include "anrs/corpus.hpp"
#include "anrs/model.hpp"

namespace anrs {

// Scores and click labels of the candidates of one impression.
struct RankedImpression {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Probability that a random clicked candidate outscores a random skipped
// one, ties counting one half. nullopt without at least one of each.
std::optional<double> Auc(const RankedImpression& impression);
// Mean over clicked candidates of 1 / rank. Equal scores keep input order.
std::optional<double> Mrr(const RankedImpression& impression);
// DCG@k with gain 2^label - 1 and log2(rank + 1) discount over the ideal
// DCG@k. Equal scores keep input order.
std::optional<double> NdcgAt(const RankedImpression& impression,
                             std::size_t k);

struct MetricReport {
  double auc = 0.0;
  double mrr = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  std::size_t impressions = 0;
  std::size_t auc_excluded = 0;   // no clicked or no skipped candidate
  std::size_t rank_excluded = 0;  // no clicked candidate
};

// Uniform average over impressions of each metric, skipping impressions a
// metric is undefined on. Throws InputError on an empty list.
MetricReport Summarize(std::span<const RankedImpression> impressions);

// Encodes every needed news once, then every user, and scores candidates
// with u . n.
std::vector<RankedImpression> ScoreImpressions(
    ModelParams& params, const Config& config, const Corpus& corpus,
    std::span<const ImpressionRecord> impressions);

MetricReport Evaluate(ModelParams& params, const Config& config,
                      const Corpus& corpus,
                      std::span<const ImpressionRecord> impressions);

// Columns in the order AUC, MRR, nDCG@5, nDCG@10, then counts.
nlohmann::ordered_json ReportJson(const MetricReport& report);
std::string ReportText(const MetricReport& report);

}  // namespace anrs

#endif  // ANRS_EVALUATION_HPP_
