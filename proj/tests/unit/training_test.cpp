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

#include "anrs/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "anrs/errors.hpp"
#include "anrs/aspect.hpp"
#include "toy.hpp"

namespace anrs {
namespace {

using testing::RandomTensor;

std::vector<double> Values(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

TEST(ClickScoreTest, Examples) {
  const std::vector<double> u{1, 2, 3}, v{3, 0, -1};
  EXPECT_DOUBLE_EQ(ClickScore(u, u), 14.0);
  EXPECT_DOUBLE_EQ(ClickScore(u, v), 0.0);
  const std::vector<double> short_v{1, 2};
  EXPECT_THROW(ClickScore(u, short_v), ShapeError);
}

TEST(ClickScoreTest, MatchesExtendedPrecisionDot) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = Values(RandomTensor({300}, rng));
    const auto n = Values(RandomTensor({300}, rng));
    long double oracle = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
      oracle += static_cast<long double>(u[i]) * n[i];
    }
    EXPECT_NEAR(ClickScore(u, n), static_cast<double>(oracle), 1e-9);
  }
}

TEST(ClickProbabilityTest, Examples) {
  const std::vector<double> six(6, 0.25);
  EXPECT_NEAR(ClickProbability(0.25, six), 1.0 / 7.0, 1e-15);
  const std::vector<double> far(6, -100.0);
  EXPECT_NEAR(ClickProbability(0.0, far), 1.0, 1e-15);
  const std::vector<double> huge(3, 1e6);
  EXPECT_NEAR(ClickProbability(1e6 + 100, huge), 1.0, 1e-15);
  const std::vector<double> two{0.0, 0.0};
  EXPECT_NEAR(ClickProbability(0.0, two), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(-std::log(ClickProbability(0.0, two)), 1.0986, 1e-4);
}

TEST(ClickProbabilityTest, ShiftInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> negs(6);
    for (double& v : negs) v = normal(rng);
    const double pos = normal(rng), shift = normal(rng) * 50.0;
    std::vector<double> shifted = negs;
    for (double& v : shifted) v += shift;
    EXPECT_NEAR(ClickProbability(pos, negs), ClickProbability(pos + shift, shifted),
                1e-12);
  }
}

TEST(RecommendationLossTest, Examples) {
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(NegativeLogLikelihood(ones).value, 0.0);
  const std::vector<double> third{1.0 / 3.0};
  EXPECT_NEAR(NegativeLogLikelihood(third).value, std::log(3.0), 1e-15);
  const std::vector<double> pair{1.0, 1.0 / 3.0};
  EXPECT_NEAR(NegativeLogLikelihood(pair).value, std::log(3.0), 1e-15);
  const std::vector<double> zero{0.0, 0.5};
  const RecommendationLoss l = NegativeLogLikelihood(zero);
  EXPECT_EQ(l.clamped, 1u);
  EXPECT_NEAR(l.value, -std::log(1e-12) + std::log(2.0), 1e-9);
}

TEST(HingeLossTest, Examples) {
  const std::vector<double> r{1, 0}, z{5, 0};
  const Tensor orthogonal({3, 2}, {0, 1, 0, 2, 0, -1});
  EXPECT_EQ(AspectHingeLoss(r, z, orthogonal), 0.0);
  const std::vector<double> zero_r{0, 0};
  EXPECT_EQ(AspectHingeLoss(zero_r, z, orthogonal), 3.0);
}

TEST(HingeLossTest, MatchesDirectFormula) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = Values(RandomTensor({8}, rng));
    const auto z = Values(RandomTensor({8}, rng));
    const Tensor negs = RandomTensor({6, 8}, rng);
    double rz = 0.0;
    for (std::size_t d = 0; d < 8; ++d) rz += r[d] * z[d];
    double expect = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      double rn = 0.0;
      for (std::size_t d = 0; d < 8; ++d) rn += r[d] * negs.at(j, d);
      expect += std::max(0.0, 1.0 - rz + rn);
    }
    EXPECT_NEAR(AspectHingeLoss(r, z, negs), expect, 1e-12);
  }
}

TEST(OrthogonalityTest, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = RandomTensor({5, 7}, rng);
    std::vector<long double> norms(5, 0.0L);
    for (std::size_t k = 0; k < 5; ++k) {
      for (std::size_t d = 0; d < 7; ++d) norms[k] += (long double)a.at(k, d) * a.at(k, d);
      norms[k] = std::sqrt(norms[k]);
    }
    long double sq = 0.0L;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        long double g = 0.0L;
        for (std::size_t d = 0; d < 7; ++d) g += (long double)a.at(i, d) * a.at(j, d);
        g = g / (norms[i] * norms[j]) - (i == j ? 1.0L : 0.0L);
        sq += g * g;
      }
    }
    EXPECT_NEAR(OrthogonalityPenalty(a), static_cast<double>(std::sqrt(sq)), 1e-12);
  }
}

class BatchLossTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = testing::ToyConfig();
    prepared_ = testing::ToyPrepared(config_);
    samples_ = MakeTrainingSamples(prepared_.corpus, prepared_.corpus.train,
                                   config_.neg_ratio, config_.history_len, 1);
    ASSERT_GE(samples_.size(), 4u);
    batch_.assign(samples_.begin(), samples_.begin() + 4);
  }

  ModelParams Params(const Config& config) const {
    return InitModel(config, prepared_.corpus, prepared_.embeddings);
  }

  Config config_;
  Prepared prepared_;
  std::vector<TrainingSample> samples_;
  std::vector<TrainingSample> batch_;
};

TEST_F(BatchLossTest, TotalIsExactSumOfTerms) {
  for (double lambda : {0.0, 1.0, 2.5}) {
    Config config = config_;
    config.lambda = lambda;
    ModelParams params = Params(config);
    const BatchLoss loss =
        ComputeBatchLoss(params, config, prepared_.corpus, batch_, true, 3);
    const LossBreakdown& b = loss.breakdown;
    EXPECT_GE(b.recommendation, 0.0);
    EXPECT_GE(b.aspect, 0.0);
    EXPECT_GE(b.orthogonality, 0.0);
    EXPECT_GT(b.aspect, 0.0);
    EXPECT_EQ(b.total, b.recommendation + b.aspect + lambda * b.orthogonality);
    EXPECT_EQ(loss.total.scalar(), b.total);
  }
}

TEST_F(BatchLossTest, DisabledAspectsReduceToRecommendationLoss) {
  Config config = config_;
  config.aspects_enabled = false;
  ModelParams params = Params(config);
  const BatchLoss loss =
      ComputeBatchLoss(params, config, prepared_.corpus, batch_, true, 3);
  EXPECT_EQ(loss.breakdown.aspect, 0.0);
  EXPECT_EQ(loss.breakdown.orthogonality, 0.0);
  EXPECT_EQ(loss.breakdown.total, loss.breakdown.recommendation);
}

TEST_F(BatchLossTest, SameSeedSameLoss) {
  ModelParams params = Params(config_);
  const double a =
      ComputeBatchLoss(params, config_, prepared_.corpus, batch_, true, 8).breakdown.total;
  const double b =
      ComputeBatchLoss(params, config_, prepared_.corpus, batch_, true, 8).breakdown.total;
  EXPECT_EQ(a, b);
}

TEST_F(BatchLossTest, FullLossGradientMatchesFiniteDifferences) {
  Config config = config_;
  config.dropout = 0.0;
  ModelParams params = Params(config);
  const std::vector<TrainingSample> batch(samples_.begin(), samples_.begin() + 2);
  for (auto& [name, p] : params.Named()) p->ZeroGrad();
  BatchLoss loss = ComputeBatchLoss(params, config, prepared_.corpus, batch, false, 5);
  ASSERT_GT(loss.tape->min_relu_margin(), 1e-6);
  loss.tape->Backward(loss.total);
  const double eps = 1e-6;
  for (auto& [name, p] : params.Named()) {
    const std::vector<double> analytic(p->grad().begin(), p->grad().end());
    for (std::size_t i = 0; i < p->size(); i += 7) {
      const double saved = (*p)[i];
      (*p)[i] = saved + eps;
      const double up =
          ComputeBatchLoss(params, config, prepared_.corpus, batch, false, 5).breakdown.total;
      (*p)[i] = saved - eps;
      const double down =
          ComputeBatchLoss(params, config, prepared_.corpus, batch, false, 5).breakdown.total;
      (*p)[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max(1e-3, std::abs(analytic[i]) + std::abs(numeric));
      EXPECT_LT(err, 1e-4) << name << "[" << i << "] " << analytic[i] << " vs " << numeric;
    }
  }
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradientSign) {
  Tensor w = Tensor::Vector({1.0, -2.0, 3.0});
  w.grad()[0] = 0.5;
  w.grad()[1] = -4.0;
  w.grad()[2] = 0.0;
  AdamOptimizer adam(0.01, 0.0);
  const NamedParams named{{"w", &w}};
  const double norm = adam.Step(named);
  EXPECT_NEAR(norm, std::sqrt(0.25 + 16.0), 1e-15);
  EXPECT_NEAR(w[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(w[1], -2.0 + 0.01, 1e-9);
  EXPECT_EQ(w[2], 3.0);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(AdamTest, MatchesReferenceRecurrenceOverSteps) {
  Tensor w = Tensor::Vector({0.3});
  AdamOptimizer adam(0.1, 0.0, 0.9, 0.999, 1e-8);
  double m = 0.0, v = 0.0, ref = 0.3;
  for (int t = 1; t <= 20; ++t) {
    const double g = 2.0 * ref - 1.0 + 0.1 * t;
    w.grad()[0] = g;
    adam.Step({{"w", &w}});
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    ref -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(w[0], ref, 1e-12) << "step " << t;
  }
  EXPECT_EQ(adam.steps(), 20u);
}

TEST(AdamTest, ClipsByGlobalNorm) {
  Tensor a = Tensor::Vector({0.0}), b = Tensor::Vector({0.0});
  a.grad()[0] = 30.0;
  b.grad()[0] = 40.0;
  AdamOptimizer clipped(1.0, 5.0, 0.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(clipped.Step({{"a", &a}, {"b", &b}}), 50.0);
  EXPECT_NEAR(a[0], -1.0, 1e-12);
  EXPECT_NEAR(b[0], -1.0, 1e-12);
}

TEST(TrainTest, DeterministicForSeedAndLogsEveryEpoch) {
  Config config = testing::ToyConfig();
  config.epochs = 2;
  const Prepared p = testing::ToyPrepared(config);
  const auto samples = MakeTrainingSamples(p.corpus, p.corpus.train,
                                           config.neg_ratio, config.history_len, 1);
  std::vector<double> first, second;
  for (auto* out : {&first, &second}) {
    ModelParams params = InitModel(config, p.corpus, p.embeddings);
    const TrainResult r = Train(config, p.corpus, samples, params, {},
                                [&](std::size_t, const LossBreakdown& b) {
                                  out->push_back(b.total);
                                });
    ASSERT_EQ(r.epochs.size(), 2u);
    EXPECT_GE(r.best_epoch, 1u);
    const std::string line = EpochLogLine(r.epochs[0]);
    for (const char* key : {"\"epoch\"", "\"U\"", "\"J\"", "\"F\"", "\"total\"",
                            "\"seconds\""}) {
      EXPECT_NE(line.find(key), std::string::npos) << key;
    }
  }
  EXPECT_EQ(first, second);
}

TEST(TrainTest, NonFiniteLossAbortsWithBatchId) {
  Config config = testing::ToyConfig();
  const Prepared p = testing::ToyPrepared(config);
  const auto samples = MakeTrainingSamples(p.corpus, p.corpus.train,
                                           config.neg_ratio, config.history_len, 1);
  ModelParams params = InitModel(config, p.corpus, p.embeddings);
  params.user_attention.query[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    Train(config, p.corpus, samples, params);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 0"), std::string::npos) << e.what();
  }
}

TEST(TrainTest, InitModelUsesKMeansCentroidsForAspects) {
  Config config = testing::ToyConfig();
  const Prepared p = testing::ToyPrepared(config);
  const ModelParams params = InitModel(config, p.corpus, p.embeddings);
  const auto points = NewsMeanEmbeddings(TrainingNews(p.corpus), p.embeddings);
  const Tensor expect = KMeans(points, config.aspects, config.seed,
                               {config.kmeans_max_iterations, config.kmeans_tolerance});
  EXPECT_EQ(Values(params.aspect_matrix), Values(expect));
  EXPECT_EQ(Values(params.word_embedding), Values(p.embeddings));
}

}  // namespace
}  // namespace anrs
