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

#ifndef ANRS_NEWS_ENCODER_HPP_
#define ANRS_NEWS_ENCODER_HPP_

#include <optional>
#include <span>

#include "anrs/aspect.hpp"
#include "anrs/corpus.hpp"
#include "anrs/model.hpp"
#include "anrs/tape.hpp"

namespace anrs {

// embed -> dropout -> same-length CNN with ReLU -> dropout -> additive
// attention over the real (non-padding) positions. Returns a zero vector of
// width `filters` when every position is padding.
//
// Padding is removed before the convolution rather than masked after it:
// the padding embedding row is zero, so this equals zero-padding the kernel
// window and giving padded positions -inf attention score.
Var EncodeText(ForwardContext& ctx, TextEncoderParams& params,
               std::span<const TokenId> tokens);

struct TextEncoding {
  Var text;
  std::optional<Var> weights;  // over real positions; absent if none
};
TextEncoding EncodeTextWithWeights(ForwardContext& ctx,
                                   TextEncoderParams& params,
                                   std::span<const TokenId> tokens);

Var EncodeTitle(ForwardContext& ctx, const NewsRecord& record);
Var EncodeAbstract(ForwardContext& ctx, const NewsRecord& record);

// relu(V_c e_c + v_c) for category and subcategory. Ids outside the tables
// fall back to row 0 ("other").
struct CategoryViews {
  Var category;
  Var subcategory;
};
CategoryViews EncodeCategories(ForwardContext& ctx, std::int32_t category,
                               std::int32_t subcategory);

// Views absent from the configuration are left empty.
struct NewsViews {
  std::optional<Var> title;
  std::optional<Var> abstract;
  std::optional<Var> category;
  std::optional<Var> subcategory;
};

// Scores each present view with the shared q_t . tanh(V_t x + v_t) (category
// views are lifted to `filters` first), normalizes the scores with a softmax
// and concatenates the weighted views in title, abstract, category,
// subcategory order.
struct FusedViews {
  Var fused;    // r
  Var weights;  // one weight per present view
};
FusedViews FuseViews(ForwardContext& ctx, const NewsViews& views);

struct NewsEncoding {
  Var news;     // n = [r; r_d], or r without aspects
  Var fused;    // r
  Var view_weights;
  std::optional<AspectOutput> aspect;
};

NewsEncoding EncodeNews(ForwardContext& ctx, const NewsRecord& record);

}  // namespace anrs

#endif  // ANRS_NEWS_ENCODER_HPP_
