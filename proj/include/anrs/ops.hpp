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

#ifndef ANRS_OPS_HPP_
#define ANRS_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "anrs/tape.hpp"
#include "anrs/tensor.hpp"

namespace anrs::ops {

// Differentiable operations. Rank conventions: "vector" is rank 1, "matrix"
// is rank 2. Every function throws ShapeError on inconsistent inputs.

// Rows of `table` selected by `ids`. Row 0 is padding and never receives
// gradient.
Var Embedding(Var table, std::span<const std::int32_t> ids);
// One row of a matrix as a vector; every row receives gradient.
Var Row(Var m, std::size_t index);

// Inverted dropout. Identity when !training or rate == 0.
Var Dropout(Var x, double rate, bool training, std::mt19937_64& rng);

enum class Activation { kNone, kRelu };

// Same-length 1-D convolution. input: T x D, kernel: F x W x D with W odd,
// bias: F. The input is zero-padded by (W - 1) / 2 on both sides.
Var Conv1dSame(Var input, Var kernel, Var bias,
               Activation activation = Activation::kRelu);

// x: N x Din (or Din), weight: Dout x Din, bias: Dout -> N x Dout (or Dout).
Var Linear(Var x, Var weight);
Var Linear(Var x, Var weight, Var bias);

// a: M x K, b: K x N.
Var MatMul(Var a, Var b);
// m: N x K, x: K -> N.
Var MatVec(Var m, Var x);
Var Transpose(Var m);
Var Reshape(Var x, Shape shape);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// x + s with s a single-element tensor broadcast over x.
Var AddBroadcast(Var x, Var s);
// x * s with s a single-element tensor.
Var ScaleBy(Var x, Var s);
Var Scale(Var x, double c);
Var AddScalar(Var x, double c);

Var Tanh(Var x);
Var Relu(Var x);

// Softmax of a vector. Positions with mask[i] == false get probability 0;
// at least one position must be unmasked. Rejects NaN input.
Var Softmax(Var x);
Var Softmax(Var x, const std::vector<bool>& mask);

Var Dot(Var a, Var b);
Var Sum(Var x);
Var Element(Var x, std::size_t index);

// Mean of the rows of an N x D matrix.
Var MeanRows(Var m);
// sum_i w[i] * m.row(i) for w of length N and m of N x D.
Var WeightedRows(Var weights, Var m);

// Concatenation of vectors.
Var Concat(std::span<const Var> parts);
// Stacks equal-length vectors into an M x D matrix.
Var Stack(std::span<const Var> rows);

// Scales each row to unit L2 norm. Zero rows are rejected.
Var NormalizeRows(Var m);
// Frobenius norm. The gradient at zero is taken to be zero.
Var FrobeniusNorm(Var m);

// -log(max(p0, floor)) with p = softmax(scores); scores[0] is the positive.
// Increments *clamped when the floor is hit.
Var NegLogSoftmaxFirst(Var scores, double floor = 1e-12,
                       std::size_t* clamped = nullptr);

// Additive attention: a_i = q . tanh(V c_i + v), weights = softmax(a),
// pooled = sum_i weights_i c_i.
struct AttentionPool {
  Var weights;
  Var pooled;
};
AttentionPool AdditiveAttentionPool(Var vectors, Var proj, Var bias,
                                    Var query);

}  // namespace anrs::ops

#endif  // ANRS_OPS_HPP_
