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

#ifndef ANRS_MODEL_HPP_
#define ANRS_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

#include "anrs/config.hpp"
#include "anrs/gradcheck.hpp"
#include "anrs/tape.hpp"
#include "anrs/tensor.hpp"

namespace anrs {

// q . tanh(proj x + bias) scoring parameters. proj: hidden x input.
struct AttentionParams {
  Tensor proj;
  Tensor bias;
  Tensor query;
};

// CNN plus word-level attention for one text field.
struct TextEncoderParams {
  Tensor kernel;  // filters x window x word_dim
  Tensor bias;    // filters
  AttentionParams attention;
};

struct ModelParams {
  Tensor word_embedding;  // vocab x word_dim; row 0 is padding
  TextEncoderParams title;
  TextEncoderParams abstract;
  Tensor category_embedding;     // categories x category_embedding_dim
  Tensor subcategory_embedding;  // subcategories x category_embedding_dim
  Tensor category_dense;         // category_dim x category_embedding_dim
  Tensor category_dense_bias;
  Tensor subcategory_dense;
  Tensor subcategory_dense_bias;
  // Category views are category_dim wide; these lift them to `filters` so
  // the shared view attention can score them.
  Tensor category_view_proj;     // filters x category_dim
  Tensor subcategory_view_proj;  // filters x category_dim
  AttentionParams view_attention;  // proj: attention_dim x filters
  Tensor aspect_bilinear;  // word_dim x word_dim
  Tensor aspect_proj;      // aspects x word_dim
  Tensor aspect_bias;      // aspects
  Tensor aspect_matrix;    // aspects x word_dim
  AttentionParams user_attention;  // proj: attention_dim x NewsDim()

  // Every tensor with a stable name, in a fixed order.
  NamedParams Named();
};

struct ModelShape {
  std::size_t vocab = 0;
  std::size_t categories = 1;
  std::size_t subcategories = 1;
};

// Width of the view-fusion vector r for the configured views.
std::size_t FusedDim(const Config& config);
// Width of the news representation n (r, plus word_dim with aspects).
std::size_t NewsDim(const Config& config);

// Glorot-uniform matrices, zero biases, N(0, 0.1^2) word embeddings with a
// zero padding row and a random aspect matrix (replace it with
// k-means centroids before training).
ModelParams InitParams(const Config& config, const ModelShape& shape,
                       std::uint64_t seed);

// Everything a forward pass needs. Parameters are bound lazily to the tape.
struct ForwardContext {
  Tape& tape;
  const Config& config;
  ModelParams& params;
  bool training = false;
  std::mt19937_64* rng = nullptr;

  Var P(Tensor& t) { return tape.Param(t); }
};

}  // namespace anrs

#endif  // ANRS_MODEL_HPP_
