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

#include "anrs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "anrs/errors.hpp"
#include "anrs/news_encoder.hpp"
#include "anrs/ops.hpp"
#include "anrs/user_encoder.hpp"

namespace anrs {
namespace {

void CheckLengths(const RankedImpression& imp) {
  if (imp.scores.size() != imp.labels.size()) {
    throw ShapeError("impression has " + std::to_string(imp.scores.size()) +
                     " scores but " + std::to_string(imp.labels.size()) +
                     " labels");
  }
}

// Candidate indices by descending score, ties in input order.
std::vector<std::size_t> RankOrder(const RankedImpression& imp) {
  std::vector<std::size_t> order(imp.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a] > imp.scores[b];
  });
  return order;
}

double Gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

std::optional<double> Auc(const RankedImpression& imp) {
  CheckLengths(imp);
  const std::size_t n = imp.scores.size();
  std::size_t positives = 0;
  for (int l : imp.labels) positives += l > 0;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  // Rank-sum with mid-ranks for ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a] < imp.scores[b];
  });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && imp.scores[order[j]] == imp.scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (imp.labels[order[t]] > 0) rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

std::optional<double> Mrr(const RankedImpression& imp) {
  CheckLengths(imp);
  const auto order = RankOrder(imp);
  double total = 0.0;
  std::size_t positives = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (imp.labels[order[r]] > 0) {
      total += 1.0 / static_cast<double>(r + 1);
      ++positives;
    }
  }
  if (positives == 0) return std::nullopt;
  return total / static_cast<double>(positives);
}

std::optional<double> NdcgAt(const RankedImpression& imp, std::size_t k) {
  CheckLengths(imp);
  const auto order = RankOrder(imp);
  std::vector<int> ideal = imp.labels;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (ideal.empty() || ideal.front() <= 0) return std::nullopt;
  double dcg = 0.0;
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    const double discount = std::log2(static_cast<double>(r) + 2.0);
    dcg += Gain(imp.labels[order[r]]) / discount;
    idcg += Gain(ideal[r]) / discount;
  }
  return dcg / idcg;
}

MetricReport Summarize(std::span<const RankedImpression> impressions) {
  if (impressions.empty()) throw InputError("empty evaluation set");
  CompensatedSum auc, mrr, n5, n10;
  std::size_t auc_count = 0, rank_count = 0;
  MetricReport report;
  report.impressions = impressions.size();
  for (const RankedImpression& imp : impressions) {
    if (auto a = Auc(imp)) {
      auc.Add(*a);
      ++auc_count;
    } else {
      ++report.auc_excluded;
    }
    auto m = Mrr(imp);
    if (!m) {
      ++report.rank_excluded;
      continue;
    }
    mrr.Add(*m);
    n5.Add(*NdcgAt(imp, 5));
    n10.Add(*NdcgAt(imp, 10));
    ++rank_count;
  }
  auto mean = [](const CompensatedSum& s, std::size_t n) {
    return n == 0 ? std::nan("") : s.value() / static_cast<double>(n);
  };
  report.auc = mean(auc, auc_count);
  report.mrr = mean(mrr, rank_count);
  report.ndcg5 = mean(n5, rank_count);
  report.ndcg10 = mean(n10, rank_count);
  return report;
}

std::vector<RankedImpression> ScoreImpressions(
    ModelParams& params, const Config& config, const Corpus& corpus,
    std::span<const ImpressionRecord> impressions) {
  std::unordered_map<std::size_t, Tensor> encoded;
  std::mt19937_64 unused_rng(0);
  auto encode = [&](std::size_t idx) -> const Tensor& {
    auto it = encoded.find(idx);
    if (it != encoded.end()) return it->second;
    Tape tape(/*record=*/false);
    ForwardContext ctx{tape, config, params, false, &unused_rng};
    return encoded.emplace(idx, EncodeNews(ctx, corpus.news[idx]).news.value())
        .first->second;
  };

  std::vector<RankedImpression> out;
  out.reserve(impressions.size());
  for (const ImpressionRecord& imp : impressions) {
    const auto history = ResolveHistory(corpus, imp, config.history_len);
    Tape tape(/*record=*/false);
    ForwardContext ctx{tape, config, params, false, &unused_rng};
    std::vector<Var> browsed;
    for (std::size_t h : history) browsed.push_back(tape.Constant(encode(h)));
    const Tensor user = EncodeUser(ctx, browsed).user.value();
    RankedImpression ranked;
    for (const Candidate& c : imp.candidates) {
      const Tensor& n = encode(corpus.Require(c.news_id));
      ranked.scores.push_back(std::inner_product(
          user.values().begin(), user.values().end(), n.values().begin(), 0.0));
      ranked.labels.push_back(c.label);
    }
    out.push_back(std::move(ranked));
  }
  return out;
}

MetricReport Evaluate(ModelParams& params, const Config& config,
                      const Corpus& corpus,
                      std::span<const ImpressionRecord> impressions) {
  if (impressions.empty()) throw InputError("empty evaluation set");
  const auto scored = ScoreImpressions(params, config, corpus, impressions);
  return Summarize(scored);
}

nlohmann::ordered_json ReportJson(const MetricReport& r) {
  return nlohmann::ordered_json{{"AUC", r.auc},
                                {"MRR", r.mrr},
                                {"nDCG@5", r.ndcg5},
                                {"nDCG@10", r.ndcg10},
                                {"impressions", r.impressions},
                                {"auc_excluded", r.auc_excluded},
                                {"rank_excluded", r.rank_excluded}};
}

std::string ReportText(const MetricReport& r) {
  std::ostringstream out;
  out << "AUC\tMRR\tnDCG@5\tnDCG@10\n"
      << std::fixed << std::setprecision(4) << r.auc << '\t' << r.mrr << '\t'
      << r.ndcg5 << '\t' << r.ndcg10 << '\n'
      << "impressions " << r.impressions << ", excluded from AUC "
      << r.auc_excluded << ", excluded from ranking metrics "
      << r.rank_excluded << '\n';
  return out.str();
}

}  // namespace anrs
