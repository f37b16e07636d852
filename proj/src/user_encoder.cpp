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

#include "anrs/user_encoder.hpp"

#include "anrs/ops.hpp"

namespace anrs {

std::vector<Var> EncodeBrowsed(ForwardContext& ctx,
                               std::span<const NewsRecord> news,
                               std::span<const std::size_t> history) {
  std::vector<Var> out;
  out.reserve(history.size());
  for (std::size_t idx : history) {
    out.push_back(EncodeNews(ctx, news[idx]).news);
  }
  return out;
}

UserEncoding EncodeUser(ForwardContext& ctx, std::span<const Var> browsed) {
  if (browsed.empty()) {
    return UserEncoding{
        ctx.tape.Constant(Tensor(Shape{NewsDim(ctx.config)})), std::nullopt};
  }
  AttentionParams& a = ctx.params.user_attention;
  ops::AttentionPool pool = ops::AdditiveAttentionPool(
      ops::Stack(browsed), ctx.P(a.proj), ctx.P(a.bias), ctx.P(a.query));
  return UserEncoding{pool.pooled, pool.weights};
}

}  // namespace anrs
