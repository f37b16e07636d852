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

#ifndef ANRS_USER_ENCODER_HPP_
#define ANRS_USER_ENCODER_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "anrs/corpus.hpp"
#include "anrs/model.hpp"
#include "anrs/news_encoder.hpp"
#include "anrs/tape.hpp"

namespace anrs {

// Browsed-news representations n'_i, produced by the same encoder (and the
// same parameters) as candidate news.
std::vector<Var> EncodeBrowsed(ForwardContext& ctx,
                               std::span<const NewsRecord> news,
                               std::span<const std::size_t> history);

struct UserEncoding {
  Var user;                    // u
  std::optional<Var> weights;  // absent for an empty history
};

// News-level additive attention over the browsed representations. An empty
// history gives the zero vector of width NewsDim(config).
UserEncoding EncodeUser(ForwardContext& ctx, std::span<const Var> browsed);

}  // namespace anrs

#endif  // ANRS_USER_ENCODER_HPP_
