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

#ifndef ANRS_ASPECT_HPP_
#define ANRS_ASPECT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "anrs/corpus.hpp"
#include "anrs/model.hpp"
#include "anrs/tape.hpp"

namespace anrs {

// Real title tokens, then real abstract tokens, then the category and
// subcategory name tokens. Throws InputError when nothing is left.
std::vector<TokenId> AspectWordSequence(const NewsRecord& record);

// Attention-based news embedding over word vectors e_i (rows of `tokens`):
// y = mean(e), h_i = e_i' H y, weights = softmax(h), z = sum weights_i e_i.
struct AspectAttention {
  Var mean;
  Var weights;
  Var embedding;
};
AspectAttention AttendAspects(Var tokens, Var bilinear);

// p = softmax(W_p z + b), r = A' p.
struct AspectReconstruction {
  Var probabilities;
  Var reconstruction;
};
AspectReconstruction ReconstructAspects(Var embedding, Var proj, Var bias,
                                        Var aspects);

struct AspectOutput {
  Var mean;            // y
  Var weights;         // attention over the word sequence
  Var embedding;       // z_d
  Var probabilities;   // p
  Var reconstruction;  // r_d
};

// Full extractor for one news. nullopt when the news has no real tokens;
// callers then use a zero reconstruction.
std::optional<AspectOutput> ExtractAspects(ForwardContext& ctx,
                                           const NewsRecord& record);

// Mean word embedding y of every news with at least one real token.
std::vector<std::vector<double>> NewsMeanEmbeddings(
    std::span<const NewsRecord> news, const Tensor& embeddings);

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // stop when no centroid moves further than this
};

// Lloyd's algorithm with k-means++ seeding. Returns a k x dim matrix of
// centroids. Throws InputError when fewer than k distinct points exist.
Tensor KMeans(std::span<const std::vector<double>> points, std::size_t k,
              std::uint64_t seed, const KMeansOptions& options = {});

struct AspectWord {
  TokenId id = 0;
  std::string word;
  double similarity = 0.0;
};

// For every aspect row, the n words with highest cosine similarity (padding
// and unknown excluded, ties by ascending id).
std::vector<std::vector<AspectWord>> AspectTopWords(const Tensor& aspects,
                                                    const Tensor& embeddings,
                                                    const Vocabulary& vocab,
                                                    std::size_t n);

nlohmann::ordered_json AspectReportJson(
    const std::vector<std::vector<AspectWord>>& report);
std::string AspectReportText(
    const std::vector<std::vector<AspectWord>>& report);

}  // namespace anrs

#endif  // ANRS_ASPECT_HPP_
