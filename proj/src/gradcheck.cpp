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

#include "anrs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace anrs {
namespace {

double Evaluate(const ScalarFn& fn) {
  Tape tape(/*record=*/false);
  return fn(tape).scalar();
}

}  // namespace

GradCheckResult FiniteDifferenceCheck(const ScalarFn& fn,
                                      const NamedParams& params,
                                      const GradCheckOptions& options) {
  for (const auto& [name, p] : params) p->ZeroGrad();
  {
    Tape tape;
    Var out = fn(tape);
    tape.Backward(out);
  }

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (const auto& [name, p] : params) {
    std::vector<double> analytic(p->grad().begin(), p->grad().end());
    std::vector<std::size_t> coords(p->size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coordinates_per_param > 0 &&
        coords.size() > options.max_coordinates_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coordinates_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double saved = (*p)[i];
      (*p)[i] = saved + options.epsilon;
      const double up = Evaluate(fn);
      (*p)[i] = saved - options.epsilon;
      const double down = Evaluate(fn);
      (*p)[i] = saved;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double err =
          std::abs(analytic[i] - numeric) / (std::abs(analytic[i]) + 1e-8);
      ++result.coordinates;
      if (result.coordinates == 1 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.param = name;
        result.index = i;
        result.analytic = analytic[i];
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace anrs
