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

#ifndef ANRS_GRADCHECK_HPP_
#define ANRS_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "anrs/tape.hpp"
#include "anrs/tensor.hpp"

namespace anrs {

using NamedParams = std::vector<std::pair<std::string, Tensor*>>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  // Location of the worst coordinate.
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckOptions {
  double epsilon = 1e-4;
  // 0 checks every coordinate; otherwise at most this many per parameter,
  // sampled without replacement.
  std::size_t max_coordinates_per_param = 0;
  std::uint64_t seed = 0;
};

// Builds a scalar on the given tape. Must be deterministic and must bind the
// checked parameters with tape.Param().
using ScalarFn = std::function<Var(Tape&)>;

// Compares reverse-mode gradients against central differences
// (f(x + eps) - f(x - eps)) / 2eps. The relative error of one coordinate is
// |analytic - numeric| / (|analytic| + 1e-8). Parameter gradients are
// overwritten.
GradCheckResult FiniteDifferenceCheck(const ScalarFn& fn,
                                      const NamedParams& params,
                                      const GradCheckOptions& options = {});

}  // namespace anrs

#endif  // ANRS_GRADCHECK_HPP_
