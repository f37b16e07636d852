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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "anrs/aspect.hpp"
#include "anrs/errors.hpp"
#include "anrs/news_encoder.hpp"
#include "anrs/ops.hpp"
#include "anrs/user_encoder.hpp"

namespace anrs {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Var ClickScore(Var user, Var news) {
  if (user.size() != news.size()) {
    throw ShapeError("click score: user width " + std::to_string(user.size()) +
                     " != news width " + std::to_string(news.size()));
  }
  return ops::Dot(user, news);
}

double ClickScore(std::span<const double> user, std::span<const double> news) {
  Tape tape(false);
  return ClickScore(tape.Constant(Tensor::Vector({user.begin(), user.end()})),
                    tape.Constant(Tensor::Vector({news.begin(), news.end()})))
      .scalar();
}

double ClickProbability(double positive, std::span<const double> negatives) {
  std::vector<double> scores{positive};
  scores.insert(scores.end(), negatives.begin(), negatives.end());
  Tape tape(false);
  return ops::Softmax(tape.Constant(Tensor::Vector(std::move(scores))))
      .value()[0];
}

RecommendationLoss NegativeLogLikelihood(
    std::span<const double> probabilities) {
  RecommendationLoss loss;
  for (double p : probabilities) {
    if (p < 1e-12) {
      ++loss.clamped;
      p = 1e-12;
    }
    loss.value -= std::log(p);
  }
  return loss;
}

Var AspectHingeLoss(Var reconstruction, Var embedding, Var negatives) {
  Var positive = ops::Dot(reconstruction, embedding);
  Var negative = ops::MatVec(negatives, reconstruction);
  Var margins =
      ops::AddScalar(ops::AddBroadcast(negative, ops::Scale(positive, -1.0)),
                     1.0);
  return ops::Sum(ops::Relu(margins));
}

double AspectHingeLoss(std::span<const double> reconstruction,
                       std::span<const double> embedding,
                       const Tensor& negatives) {
  Tape tape(false);
  return AspectHingeLoss(
             tape.Constant(Tensor::Vector(
                 {reconstruction.begin(), reconstruction.end()})),
             tape.Constant(Tensor::Vector({embedding.begin(), embedding.end()})),
             tape.Constant(negatives))
      .scalar();
}

Var OrthogonalityPenalty(Var aspects) {
  Var normalized = ops::NormalizeRows(aspects);
  Var gram = ops::MatMul(normalized, ops::Transpose(normalized));
  Var identity =
      aspects.tape->Constant(Tensor::Identity(aspects.value().dim(0)));
  return ops::FrobeniusNorm(ops::Sub(gram, identity));
}

double OrthogonalityPenalty(const Tensor& aspects) {
  Tape tape(false);
  return OrthogonalityPenalty(tape.Constant(aspects)).scalar();
}

BatchLoss ComputeBatchLoss(ModelParams& params, const Config& config,
                           const Corpus& corpus,
                           std::span<const TrainingSample> batch,
                           bool training, std::uint64_t seed) {
  BatchLoss out;
  out.tape = std::make_unique<Tape>();
  Tape& tape = *out.tape;
  std::mt19937_64 rng(seed);
  ForwardContext ctx{tape, config, params, training, &rng};

  std::vector<std::size_t> order;
  std::unordered_map<std::size_t, NewsEncoding> encoded;
  auto encode = [&](std::size_t idx) -> const NewsEncoding& {
    auto it = encoded.find(idx);
    if (it != encoded.end()) return it->second;
    order.push_back(idx);
    return encoded.emplace(idx, EncodeNews(ctx, corpus.news[idx]))
        .first->second;
  };

  std::vector<Var> nll;
  for (const TrainingSample& sample : batch) {
    std::vector<Var> browsed;
    for (std::size_t h : sample.history) browsed.push_back(encode(h).news);
    Var user = EncodeUser(ctx, browsed).user;
    std::vector<Var> scores{ClickScore(user, encode(sample.positive).news)};
    for (std::size_t n : sample.negatives) {
      scores.push_back(ClickScore(user, encode(n).news));
    }
    nll.push_back(ops::NegLogSoftmaxFirst(ops::Concat(scores), 1e-12,
                                          &out.breakdown.clamped));
  }
  if (nll.empty()) throw InputError("empty training batch");
  Var total = ops::Sum(ops::Concat(nll));
  out.breakdown.recommendation = total.scalar();
  out.breakdown.lambda = config.lambda;

  if (config.aspects_enabled) {
    std::vector<std::size_t> with_aspects;
    for (std::size_t idx : order) {
      if (encoded.at(idx).aspect) with_aspects.push_back(idx);
    }
    std::vector<Var> hinges;
    if (with_aspects.size() >= 2 && config.aspect_negatives > 0) {
      std::uniform_int_distribution<std::size_t> pick(0,
                                                      with_aspects.size() - 2);
      for (std::size_t i = 0; i < with_aspects.size(); ++i) {
        const AspectOutput& a = *encoded.at(with_aspects[i]).aspect;
        std::vector<Var> negatives;
        for (std::size_t j = 0; j < config.aspect_negatives; ++j) {
          std::size_t other = pick(rng);
          if (other >= i) ++other;  // skip the news itself
          negatives.push_back(encoded.at(with_aspects[other]).aspect->mean);
        }
        hinges.push_back(AspectHingeLoss(a.reconstruction, a.embedding,
                                         ops::Stack(negatives)));
      }
    }
    if (!hinges.empty()) {
      Var j = ops::Sum(ops::Concat(hinges));
      out.breakdown.aspect = j.scalar();
      total = ops::Add(total, j);
    }
    Var f = OrthogonalityPenalty(ctx.P(params.aspect_matrix));
    out.breakdown.orthogonality = f.scalar();
    total = ops::Add(total, ops::Scale(f, config.lambda));
  }
  out.breakdown.total = total.scalar();
  out.total = total;
  return out;
}

AdamOptimizer::AdamOptimizer(double learning_rate, double clip_norm,
                             double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      clip_norm_(clip_norm),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

double AdamOptimizer::Step(const NamedParams& params) {
  double squared = 0.0;
  for (const auto& [name, p] : params) {
    for (double g : static_cast<const Tensor&>(*p).grad()) squared += g * g;
  }
  const double norm = std::sqrt(squared);
  const double scale =
      clip_norm_ > 0.0 && norm > clip_norm_ ? clip_norm_ / norm : 1.0;
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  for (const auto& [name, p] : params) {
    const auto grad = static_cast<const Tensor&>(*p).grad();
    if (grad.empty()) continue;
    Moments& m = moments_[name];
    if (m.first.size() != p->size()) {
      m.first.assign(p->size(), 0.0);
      m.second.assign(p->size(), 0.0);
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = grad[i] * scale;
      m.first[i] = beta1_ * m.first[i] + (1.0 - beta1_) * g;
      m.second[i] = beta2_ * m.second[i] + (1.0 - beta2_) * g * g;
      (*p)[i] -= learning_rate_ * (m.first[i] / c1) /
                 (std::sqrt(m.second[i] / c2) + epsilon_);
    }
  }
  return norm;
}

std::vector<NewsRecord> TrainingNews(const Corpus& corpus) {
  std::set<std::size_t> used;
  for (const ImpressionRecord& imp : corpus.train) {
    for (const Candidate& c : imp.candidates) used.insert(corpus.Require(c.news_id));
    for (const std::string& h : imp.history) {
      if (auto idx = corpus.IndexOf(h)) used.insert(*idx);
    }
  }
  std::vector<NewsRecord> out;
  for (std::size_t idx : used) out.push_back(corpus.news[idx]);
  return out;
}

ModelParams InitModel(const Config& config, const Corpus& corpus,
                      const Tensor& embeddings) {
  ModelShape shape{corpus.vocab.size(), corpus.categories.size(),
                   corpus.subcategories.size()};
  ModelParams params = InitParams(config, shape, config.seed);
  if (embeddings.shape() != params.word_embedding.shape()) {
    throw ShapeError("embedding table " + ShapeToString(embeddings.shape()) +
                     " does not match vocabulary x word_dim " +
                     ShapeToString(params.word_embedding.shape()));
  }
  params.word_embedding = embeddings;
  for (double& v : params.word_embedding.row(kPadId)) v = 0.0;
  if (config.aspects_enabled) {
    const auto news = TrainingNews(corpus);
    const auto points = NewsMeanEmbeddings(news, params.word_embedding);
    params.aspect_matrix =
        KMeans(points, config.aspects, config.seed,
               KMeansOptions{config.kmeans_max_iterations,
                             config.kmeans_tolerance});
  }
  return params;
}

TrainResult Train(const Config& config, const Corpus& corpus,
                  std::span<const TrainingSample> samples,
                  ModelParams& params,
                  const std::function<void(const EpochLog&)>& on_epoch,
                  const StepCallback& on_step) {
  if (samples.empty()) throw InputError("no training samples");
  const NamedParams named = params.Named();
  AdamOptimizer optimizer(config.learning_rate, config.clip_norm);
  std::mt19937_64 shuffle_rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  bool have_best = false;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<TrainingSample> batch;
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(samples[order[i]]);
      }
      for (const auto& [name, p] : named) p->ZeroGrad();
      const std::uint64_t batch_seed =
          SplitMix64(config.seed ^ SplitMix64(epoch * 1000003ULL + log.batches));
      const std::string where = "epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(log.batches);
      BatchLoss loss;
      try {
        loss = ComputeBatchLoss(params, config, corpus, batch, true, batch_seed);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " in " + where);
      }
      if (!std::isfinite(loss.breakdown.total)) {
        throw NumericalError("non-finite loss in " + where);
      }
      loss.tape->Backward(loss.total);
      optimizer.Step(named);
      log.loss.recommendation += loss.breakdown.recommendation;
      log.loss.aspect += loss.breakdown.aspect;
      log.loss.orthogonality += loss.breakdown.orthogonality;
      log.loss.total += loss.breakdown.total;
      log.loss.clamped += loss.breakdown.clamped;
      ++log.batches;
      if (on_step) on_step(step, loss.breakdown);
      ++step;
    }
    const double n = static_cast<double>(log.batches);
    log.loss.recommendation /= n;
    log.loss.aspect /= n;
    log.loss.orthogonality /= n;
    log.loss.total /= n;
    log.loss.lambda = config.lambda;
    if (!corpus.valid.empty()) {
      log.validation = Evaluate(params, config, corpus, corpus.valid);
    }
    log.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    const double auc = log.validation ? log.validation->auc : 0.0;
    if (!have_best || !log.validation || auc > result.best_auc) {
      result.best = params;
      result.best_epoch = epoch;
      result.best_auc = auc;
      have_best = true;
    }
    if (on_epoch) on_epoch(log);
    result.epochs.push_back(log);
  }
  for (auto& [name, p] : result.best.Named()) p->ZeroGrad();
  return result;
}

std::string EpochLogLine(const EpochLog& log) {
  nlohmann::ordered_json j{{"epoch", log.epoch},
                           {"U", log.loss.recommendation},
                           {"J", log.loss.aspect},
                           {"F", log.loss.orthogonality},
                           {"total", log.loss.total},
                           {"batches", log.batches}};
  if (log.validation) {
    j["val_AUC"] = log.validation->auc;
    j["val_MRR"] = log.validation->mrr;
    j["val_nDCG@5"] = log.validation->ndcg5;
    j["val_nDCG@10"] = log.validation->ndcg10;
  }
  j["seconds"] = log.seconds;
  return j.dump();
}

}  // namespace anrs
