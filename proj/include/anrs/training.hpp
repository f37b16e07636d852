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

#ifndef ANRS_TRAINING_HPP_
#define ANRS_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anrs/config.hpp"
#include "anrs/corpus.hpp"
#include "anrs/evaluation.hpp"
#include "anrs/model.hpp"
#include "anrs/tape.hpp"

namespace anrs {

// u . n. Throws ShapeError when the widths differ.
Var ClickScore(Var user, Var news);
double ClickScore(std::span<const double> user, std::span<const double> news);

// exp(pos) / (exp(pos) + sum_j exp(neg_j)), computed after subtracting the
// largest score.
double ClickProbability(double positive, std::span<const double> negatives);

struct RecommendationLoss {
  double value = 0.0;
  std::size_t clamped = 0;  // probabilities raised to the 1e-12 floor
};
// -sum log p_i.
RecommendationLoss NegativeLogLikelihood(std::span<const double> probabilities);

// sum_j max(0, 1 - r.z + r.n_j) with the negatives as rows of an G x D
// matrix.
Var AspectHingeLoss(Var reconstruction, Var embedding, Var negatives);
double AspectHingeLoss(std::span<const double> reconstruction,
                       std::span<const double> embedding,
                       const Tensor& negatives);

// ||A_n A_n' - I||_F with A_n the row-normalized aspect matrix. Zero rows
// are rejected with ShapeError.
Var OrthogonalityPenalty(Var aspects);
double OrthogonalityPenalty(const Tensor& aspects);

struct LossBreakdown {
  double recommendation = 0.0;  // U
  double aspect = 0.0;          // J
  double orthogonality = 0.0;   // F
  double lambda = 0.0;
  double total = 0.0;           // U + J + lambda F
  std::size_t clamped = 0;
};

struct BatchLoss {
  std::unique_ptr<Tape> tape;
  Var total;
  LossBreakdown breakdown;
};

// Loss of one mini-batch on a fresh tape. Every distinct news of the batch
// (candidates and history) is encoded once; each of them with aspect
// output contributes `aspect_negatives` hinge terms whose negatives are mean
// word embeddings of other news of the batch. `seed` drives dropout and the
// hinge negatives.
BatchLoss ComputeBatchLoss(ModelParams& params, const Config& config,
                           const Corpus& corpus,
                           std::span<const TrainingSample> batch,
                           bool training, std::uint64_t seed);

// Adaptive-moment optimizer with global-norm gradient clipping.
class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double clip_norm, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  // Applies one update from the current gradients. Returns the gradient
  // norm before clipping.
  double Step(const NamedParams& params);

  std::size_t steps() const { return steps_; }
  double learning_rate() const { return learning_rate_; }

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };
  double learning_rate_;
  double clip_norm_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::size_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

// Parameters for a corpus: word embeddings copied from `embeddings` and, with
// aspects enabled, the aspect matrix set to k-means centroids of the mean
// word embeddings of the training news.
ModelParams InitModel(const Config& config, const Corpus& corpus,
                      const Tensor& embeddings);

// News referenced (as candidate or history) by the training impressions.
std::vector<NewsRecord> TrainingNews(const Corpus& corpus);

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown loss;  // averaged over the epoch's batches
  std::size_t batches = 0;
  std::optional<MetricReport> validation;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  ModelParams best;          // parameters of the best validation AUC epoch
  std::size_t best_epoch = 0;
  double best_auc = 0.0;
};

// Called after every optimizer step with the step index and batch loss.
using StepCallback = std::function<void(std::size_t, const LossBreakdown&)>;

// Mini-batch training over `samples`. Validates on corpus.valid after every
// epoch when it is nonempty (otherwise the last epoch is kept). Throws
// NumericalError naming the batch when the loss is not finite.
TrainResult Train(const Config& config, const Corpus& corpus,
                  std::span<const TrainingSample> samples,
                  ModelParams& params,
                  const std::function<void(const EpochLog&)>& on_epoch = {},
                  const StepCallback& on_step = {});

// One structured line: epoch, U, J, F, total, validation metrics, seconds.
std::string EpochLogLine(const EpochLog& log);

}  // namespace anrs

#endif  // ANRS_TRAINING_HPP_
