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

#include "anrs/aspect.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "anrs/errors.hpp"
#include "anrs/ops.hpp"

namespace anrs {

std::vector<TokenId> AspectWordSequence(const NewsRecord& record) {
  std::vector<TokenId> seq = RealTokens(record.title_tokens);
  for (TokenId t : RealTokens(record.abstract_tokens)) seq.push_back(t);
  for (TokenId t : RealTokens(record.category_tokens)) seq.push_back(t);
  if (seq.empty()) {
    throw InputError("news " + record.news_id + " has no tokens for aspects");
  }
  return seq;
}

AspectAttention AttendAspects(Var tokens, Var bilinear) {
  Var mean = ops::MeanRows(tokens);
  Var scores = ops::MatVec(tokens, ops::MatVec(bilinear, mean));
  Var weights = ops::Softmax(scores);
  return AspectAttention{mean, weights, ops::WeightedRows(weights, tokens)};
}

AspectReconstruction ReconstructAspects(Var embedding, Var proj, Var bias,
                                        Var aspects) {
  Var p = ops::Softmax(ops::Linear(embedding, proj, bias));
  return AspectReconstruction{p, ops::WeightedRows(p, aspects)};
}

std::optional<AspectOutput> ExtractAspects(ForwardContext& ctx,
                                           const NewsRecord& record) {
  std::vector<TokenId> seq;
  try {
    seq = AspectWordSequence(record);
  } catch (const InputError&) {
    return std::nullopt;
  }
  ModelParams& p = ctx.params;
  Var tokens = ops::Embedding(ctx.P(p.word_embedding), seq);
  AspectAttention att = AttendAspects(tokens, ctx.P(p.aspect_bilinear));
  AspectReconstruction rec =
      ReconstructAspects(att.embedding, ctx.P(p.aspect_proj),
                         ctx.P(p.aspect_bias), ctx.P(p.aspect_matrix));
  return AspectOutput{att.mean, att.weights, att.embedding, rec.probabilities,
                      rec.reconstruction};
}

std::vector<std::vector<double>> NewsMeanEmbeddings(
    std::span<const NewsRecord> news, const Tensor& embeddings) {
  std::vector<std::vector<double>> out;
  const std::size_t dim = embeddings.dim(1);
  for (const NewsRecord& r : news) {
    std::vector<TokenId> seq;
    try {
      seq = AspectWordSequence(r);
    } catch (const InputError&) {
      continue;
    }
    std::vector<double> mean(dim, 0.0);
    for (TokenId t : seq) {
      const auto row = embeddings.row(static_cast<std::size_t>(t));
      for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    }
    for (double& v : mean) v /= static_cast<double>(seq.size());
    out.push_back(std::move(mean));
  }
  return out;
}

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

Tensor KMeans(std::span<const std::vector<double>> points, std::size_t k,
              std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw InputError("k-means needs k >= 1");
  if (points.empty()) throw InputError("k-means on an empty set");
  const std::size_t dim = points.front().size();
  {
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() < k) {
      throw InputError("k-means: only " + std::to_string(distinct.size()) +
                       " distinct points for k = " + std::to_string(k));
    }
  }
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  Tensor centroids(Shape{k, dim});

  // k-means++ seeding.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::copy(points[first].begin(), points[first].end(),
            centroids.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] =
          std::min(nearest[i], SquaredDistance(points[i], centroids.row(c - 1)));
      total += nearest[i];
    }
    std::size_t chosen = 0;
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      chosen = i;
      target -= nearest[i];
      if (target <= 0.0) break;
    }
    std::copy(points[chosen].begin(), points[chosen].end(),
              centroids.row(c).begin());
  }

  std::vector<std::size_t> assign(n, 0);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = SquaredDistance(points[i], centroids.row(c));
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }
    Tensor next(Shape{k, dim});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = next.row(assign[i]);
      for (std::size_t d = 0; d < dim; ++d) row[d] += points[i][d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: restart it at the point farthest from its centroid.
        std::size_t far = 0;
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = SquaredDistance(points[i], centroids.row(assign[i]));
          if (d > worst) {
            worst = d;
            far = i;
          }
        }
        std::copy(points[far].begin(), points[far].end(), next.row(c).begin());
        continue;
      }
      for (double& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(SquaredDistance(next.row(c),
                                                        centroids.row(c))));
    }
    centroids = std::move(next);
    if (shift < options.tolerance) break;
  }
  return centroids;
}

std::vector<std::vector<AspectWord>> AspectTopWords(const Tensor& aspects,
                                                    const Tensor& embeddings,
                                                    const Vocabulary& vocab,
                                                    std::size_t n) {
  const std::size_t k = aspects.dim(0);
  const std::size_t dim = aspects.dim(1);
  const std::size_t v = embeddings.dim(0);
  if (embeddings.dim(1) != dim) {
    throw ShapeError("aspect matrix and embeddings disagree on width");
  }
  std::vector<double> norms(v, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    const auto row = embeddings.row(w);
    norms[w] = std::sqrt(std::inner_product(row.begin(), row.end(),
                                            row.begin(), 0.0));
  }
  std::vector<std::vector<AspectWord>> report(k);
  for (std::size_t a = 0; a < k; ++a) {
    const auto arow = aspects.row(a);
    const double anorm = std::sqrt(
        std::inner_product(arow.begin(), arow.end(), arow.begin(), 0.0));
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t w = 2; w < v; ++w) {
      const auto row = embeddings.row(w);
      const double dot =
          std::inner_product(row.begin(), row.end(), arow.begin(), 0.0);
      const double denom = norms[w] * anorm;
      scored.emplace_back(denom > 0.0 ? dot / denom : 0.0, w);
    }
    const std::size_t take = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), [](const auto& x, const auto& y) {
                        if (x.first != y.first) return x.first > y.first;
                        return x.second < y.second;
                      });
    for (std::size_t i = 0; i < take; ++i) {
      const auto id = static_cast<TokenId>(scored[i].second);
      report[a].push_back(AspectWord{id, vocab.Word(id), scored[i].first});
    }
  }
  return report;
}

nlohmann::ordered_json AspectReportJson(
    const std::vector<std::vector<AspectWord>>& report) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < report.size(); ++a) {
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (const AspectWord& w : report[a]) {
      words.push_back({{"word", w.word}, {"similarity", w.similarity}});
    }
    out.push_back({{"aspect", a}, {"words", words}});
  }
  return out;
}

std::string AspectReportText(
    const std::vector<std::vector<AspectWord>>& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  for (std::size_t a = 0; a < report.size(); ++a) {
    out << "aspect " << a << ":";
    for (const AspectWord& w : report[a]) {
      out << ' ' << w.word << '(' << w.similarity << ')';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace anrs
