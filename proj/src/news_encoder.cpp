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

#include "anrs/news_encoder.hpp"

#include <vector>

#include "anrs/ops.hpp"

namespace anrs {

TextEncoding EncodeTextWithWeights(ForwardContext& ctx,
                                   TextEncoderParams& params,
                                   std::span<const TokenId> tokens) {
  const std::vector<TokenId> real = RealTokens(tokens);
  if (real.empty()) {
    return {ctx.tape.Constant(Tensor(Shape{ctx.config.filters})), std::nullopt};
  }
  const double rate = ctx.config.dropout;
  Var x = ops::Embedding(ctx.P(ctx.params.word_embedding), real);
  if (ctx.training) x = ops::Dropout(x, rate, true, *ctx.rng);
  Var c = ops::Conv1dSame(x, ctx.P(params.kernel), ctx.P(params.bias));
  if (ctx.training) c = ops::Dropout(c, rate, true, *ctx.rng);
  const ops::AttentionPool pool = ops::AdditiveAttentionPool(
      c, ctx.P(params.attention.proj), ctx.P(params.attention.bias),
      ctx.P(params.attention.query));
  return {pool.pooled, pool.weights};
}

Var EncodeText(ForwardContext& ctx, TextEncoderParams& params,
               std::span<const TokenId> tokens) {
  return EncodeTextWithWeights(ctx, params, tokens).text;
}

Var EncodeTitle(ForwardContext& ctx, const NewsRecord& record) {
  return EncodeText(ctx, ctx.params.title, record.title_tokens);
}

Var EncodeAbstract(ForwardContext& ctx, const NewsRecord& record) {
  return EncodeText(ctx, ctx.params.abstract, record.abstract_tokens);
}

CategoryViews EncodeCategories(ForwardContext& ctx, std::int32_t category,
                               std::int32_t subcategory) {
  ModelParams& p = ctx.params;
  auto clamp = [](std::int32_t id, const Tensor& table) {
    return id < 0 || static_cast<std::size_t>(id) >= table.dim(0) ? 0 : id;
  };
  Var ec = ops::Row(ctx.P(p.category_embedding),
                    static_cast<std::size_t>(clamp(category, p.category_embedding)));
  Var esc = ops::Row(
      ctx.P(p.subcategory_embedding),
      static_cast<std::size_t>(clamp(subcategory, p.subcategory_embedding)));
  Var rc = ops::Relu(
      ops::Linear(ec, ctx.P(p.category_dense), ctx.P(p.category_dense_bias)));
  Var rsc = ops::Relu(ops::Linear(esc, ctx.P(p.subcategory_dense),
                                  ctx.P(p.subcategory_dense_bias)));
  return CategoryViews{rc, rsc};
}

FusedViews FuseViews(ForwardContext& ctx, const NewsViews& views) {
  ModelParams& p = ctx.params;
  Var proj = ctx.P(p.view_attention.proj);
  Var bias = ctx.P(p.view_attention.bias);
  Var query = ctx.P(p.view_attention.query);
  auto score = [&](Var x) {
    return ops::Dot(query, ops::Tanh(ops::Linear(x, proj, bias)));
  };
  std::vector<Var> blocks;
  std::vector<Var> scores;
  if (views.title) {
    blocks.push_back(*views.title);
    scores.push_back(score(*views.title));
  }
  if (views.abstract) {
    blocks.push_back(*views.abstract);
    scores.push_back(score(*views.abstract));
  }
  if (views.category) {
    blocks.push_back(*views.category);
    scores.push_back(
        score(ops::MatVec(ctx.P(p.category_view_proj), *views.category)));
  }
  if (views.subcategory) {
    blocks.push_back(*views.subcategory);
    scores.push_back(score(
        ops::MatVec(ctx.P(p.subcategory_view_proj), *views.subcategory)));
  }
  Var weights = ops::Softmax(ops::Concat(scores));
  std::vector<Var> weighted;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    weighted.push_back(ops::ScaleBy(blocks[i], ops::Element(weights, i)));
  }
  return FusedViews{ops::Concat(weighted), weights};
}

NewsEncoding EncodeNews(ForwardContext& ctx, const NewsRecord& record) {
  const InputViews& enabled = ctx.config.views;
  NewsViews views;
  if (enabled.title) views.title = EncodeTitle(ctx, record);
  if (enabled.abstract) views.abstract = EncodeAbstract(ctx, record);
  if (enabled.category) {
    CategoryViews cats =
        EncodeCategories(ctx, record.category, record.subcategory);
    views.category = cats.category;
    views.subcategory = cats.subcategory;
  }
  FusedViews fused = FuseViews(ctx, views);
  NewsEncoding out{fused.fused, fused.fused, fused.weights, std::nullopt};
  if (ctx.config.aspects_enabled) {
    out.aspect = ExtractAspects(ctx, record);
    Var rd = out.aspect ? out.aspect->reconstruction
                        : ctx.tape.Constant(Tensor(Shape{ctx.config.word_dim}));
    const Var parts[] = {fused.fused, rd};
    out.news = ops::Concat(parts);
  }
  return out;
}

}  // namespace anrs
