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

#include "anrs/model.hpp"

#include <cmath>

namespace anrs {
namespace {

Tensor Glorot(Shape shape, std::size_t fan_in, std::size_t fan_out,
              std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

AttentionParams InitAttention(std::size_t hidden, std::size_t input,
                              std::mt19937_64& rng) {
  AttentionParams a;
  a.proj = Glorot(Shape{hidden, input}, input, hidden, rng);
  a.bias = Tensor(Shape{hidden});
  a.query = Glorot(Shape{hidden}, hidden, 1, rng);
  return a;
}

TextEncoderParams InitText(const Config& c, std::mt19937_64& rng) {
  TextEncoderParams p;
  p.kernel = Glorot(Shape{c.filters, c.window, c.word_dim},
                    c.window * c.word_dim, c.filters, rng);
  p.bias = Tensor(Shape{c.filters});
  p.attention = InitAttention(c.attention_dim, c.filters, rng);
  return p;
}

void AddAttention(NamedParams& out, const std::string& prefix,
                  AttentionParams& a) {
  out.emplace_back(prefix + ".proj", &a.proj);
  out.emplace_back(prefix + ".bias", &a.bias);
  out.emplace_back(prefix + ".query", &a.query);
}

void AddText(NamedParams& out, const std::string& prefix,
             TextEncoderParams& t) {
  out.emplace_back(prefix + ".kernel", &t.kernel);
  out.emplace_back(prefix + ".bias", &t.bias);
  AddAttention(out, prefix + ".attention", t.attention);
}

}  // namespace

NamedParams ModelParams::Named() {
  NamedParams out;
  out.emplace_back("word_embedding", &word_embedding);
  AddText(out, "title", title);
  AddText(out, "abstract", abstract);
  out.emplace_back("category_embedding", &category_embedding);
  out.emplace_back("subcategory_embedding", &subcategory_embedding);
  out.emplace_back("category_dense", &category_dense);
  out.emplace_back("category_dense_bias", &category_dense_bias);
  out.emplace_back("subcategory_dense", &subcategory_dense);
  out.emplace_back("subcategory_dense_bias", &subcategory_dense_bias);
  out.emplace_back("category_view_proj", &category_view_proj);
  out.emplace_back("subcategory_view_proj", &subcategory_view_proj);
  AddAttention(out, "view_attention", view_attention);
  out.emplace_back("aspect_bilinear", &aspect_bilinear);
  out.emplace_back("aspect_proj", &aspect_proj);
  out.emplace_back("aspect_bias", &aspect_bias);
  out.emplace_back("aspect_matrix", &aspect_matrix);
  AddAttention(out, "user_attention", user_attention);
  return out;
}

std::size_t FusedDim(const Config& c) {
  std::size_t dim = 0;
  if (c.views.title) dim += c.filters;
  if (c.views.abstract) dim += c.filters;
  if (c.views.category) dim += 2 * c.category_dim;
  return dim;
}

std::size_t NewsDim(const Config& c) {
  return FusedDim(c) + (c.aspects_enabled ? c.word_dim : 0);
}

ModelParams InitParams(const Config& c, const ModelShape& shape,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.word_embedding = Tensor(Shape{shape.vocab, c.word_dim});
  std::normal_distribution<double> normal(0.0, 0.1);
  for (std::size_t r = 1; r < shape.vocab; ++r) {
    for (double& v : p.word_embedding.row(r)) v = normal(rng);
  }
  p.title = InitText(c, rng);
  p.abstract = InitText(c, rng);
  p.category_embedding =
      Glorot(Shape{shape.categories, c.category_embedding_dim},
             shape.categories, c.category_embedding_dim, rng);
  p.subcategory_embedding =
      Glorot(Shape{shape.subcategories, c.category_embedding_dim},
             shape.subcategories, c.category_embedding_dim, rng);
  p.category_dense =
      Glorot(Shape{c.category_dim, c.category_embedding_dim},
             c.category_embedding_dim, c.category_dim, rng);
  p.category_dense_bias = Tensor(Shape{c.category_dim});
  p.subcategory_dense =
      Glorot(Shape{c.category_dim, c.category_embedding_dim},
             c.category_embedding_dim, c.category_dim, rng);
  p.subcategory_dense_bias = Tensor(Shape{c.category_dim});
  p.category_view_proj = Glorot(Shape{c.filters, c.category_dim},
                                c.category_dim, c.filters, rng);
  p.subcategory_view_proj = Glorot(Shape{c.filters, c.category_dim},
                                   c.category_dim, c.filters, rng);
  p.view_attention = InitAttention(c.attention_dim, c.filters, rng);
  p.aspect_bilinear =
      Glorot(Shape{c.word_dim, c.word_dim}, c.word_dim, c.word_dim, rng);
  p.aspect_proj =
      Glorot(Shape{c.aspects, c.word_dim}, c.word_dim, c.aspects, rng);
  p.aspect_bias = Tensor(Shape{c.aspects});
  p.aspect_matrix = Tensor(Shape{c.aspects, c.word_dim});
  for (double& v : p.aspect_matrix.values()) v = normal(rng);
  p.user_attention = InitAttention(c.attention_dim, NewsDim(c), rng);
  return p;
}

}  // namespace anrs
