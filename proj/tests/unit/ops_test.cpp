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

#include "anrs/ops.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "anrs/errors.hpp"
#include "anrs/gradcheck.hpp"
#include "toy.hpp"

namespace anrs {
namespace {

using testing::RandomTensor;

using Builder = std::function<Var(Tape&, std::vector<Var>&)>;

// Reduces any output to a scalar with fixed random weights so every output
// coordinate contributes to the checked gradient.
Var Project(Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  Tensor w = RandomTensor({out.size()}, rng);
  Var flat = ops::Reshape(out, {out.size()});
  return ops::Dot(flat, out.tape->Constant(std::move(w)));
}

// Central-difference check of `build` on `instances` random draws of inputs
// with the given shapes. Draws landing within 1e-3 of a ReLU kink are
// replaced.
void ExpectGradients(const std::vector<Shape>& shapes, const Builder& build,
                     int instances = 10, double scale = 1.0) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < instances; ++seed) {
    ASSERT_LT(seed, 200u) << "too many draws near a kink";
    std::mt19937_64 rng(seed);
    std::vector<Tensor> inputs;
    for (const Shape& s : shapes) inputs.push_back(RandomTensor(s, rng, scale));
    NamedParams named;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      named.emplace_back("in" + std::to_string(i), &inputs[i]);
    }
    ScalarFn fn = [&](Tape& tape) {
      std::vector<Var> vars;
      for (Tensor& t : inputs) vars.push_back(tape.Param(t));
      return Project(build(tape, vars), seed);
    };
    {
      Tape probe;
      fn(probe);
      if (probe.min_relu_margin() < 1e-3) continue;
    }
    GradCheckOptions options;
    options.epsilon = 1e-6;
    const GradCheckResult r = FiniteDifferenceCheck(fn, named, options);
    EXPECT_LT(r.max_relative_error, 1e-4)
        << "seed " << seed << " worst " << r.param << "[" << r.index
        << "] analytic " << r.analytic << " numeric " << r.numeric;
    ++checked;
  }
}

Tensor Values(Var v) { return v.value(); }

TEST(OpsForwardTest, LinearMatchesManualProduct) {
  Tape tape(false);
  Var x = tape.Constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  Var w = tape.Constant(Tensor({2, 3}, {1, 0, -1, 2, 1, 0}));
  Var b = tape.Constant(Tensor::Vector({0.5, -0.5}));
  Tensor y = Values(ops::Linear(x, w, b));
  EXPECT_EQ(y.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(y.at(0, 0), 1 - 3 + 0.5);
  EXPECT_DOUBLE_EQ(y.at(0, 1), 2 + 2 - 0.5);
  EXPECT_DOUBLE_EQ(y.at(1, 0), 4 - 6 + 0.5);
  EXPECT_DOUBLE_EQ(y.at(1, 1), 8 + 5 - 0.5);
}

TEST(OpsForwardTest, ConvSameMatchesDirectSum) {
  std::mt19937_64 rng(5);
  const std::size_t t = 5, d = 3, f = 2, w = 3;
  Tensor in = RandomTensor({t, d}, rng);
  Tensor k = RandomTensor({f, w, d}, rng);
  Tensor b = RandomTensor({f}, rng);
  Tape tape(false);
  Tensor out = Values(ops::Conv1dSame(tape.Constant(in), tape.Constant(k),
                                      tape.Constant(b), ops::Activation::kNone));
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      double sum = b[j];
      for (std::size_t o = 0; o < w; ++o) {
        const long pos = static_cast<long>(i + o) - 1;
        if (pos < 0 || pos >= static_cast<long>(t)) continue;
        for (std::size_t c = 0; c < d; ++c) {
          sum += k[(j * w + o) * d + c] * in.at(static_cast<std::size_t>(pos), c);
        }
      }
      EXPECT_NEAR(out.at(i, j), sum, 1e-12);
    }
  }
}

TEST(OpsForwardTest, ConvRejectsEvenWindowAndDepthMismatch) {
  Tape tape(false);
  Var in = tape.Constant(Tensor({4, 3}));
  EXPECT_THROW(ops::Conv1dSame(in, tape.Constant(Tensor({2, 2, 3})),
                               tape.Constant(Tensor({2}))),
               ShapeError);
  EXPECT_THROW(ops::Conv1dSame(in, tape.Constant(Tensor({2, 3, 4})),
                               tape.Constant(Tensor({2}))),
               ShapeError);
}

TEST(OpsForwardTest, SoftmaxIsShiftStable) {
  Tape tape(false);
  Tensor p = Values(ops::Softmax(tape.Constant(Tensor::Vector({1000, 1000, 900}))));
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(OpsForwardTest, SoftmaxMaskZeroesPositions) {
  Tape tape(false);
  Tensor p = Values(ops::Softmax(tape.Constant(Tensor::Vector({1, 2, 3})),
                                 {true, false, true}));
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[0] + p[2], 1.0, 1e-12);
  EXPECT_THROW(ops::Softmax(tape.Constant(Tensor::Vector({1, 2})),
                            {false, false}),
               ShapeError);
}

TEST(OpsForwardTest, SoftmaxRejectsNaN) {
  Tape tape(false);
  EXPECT_ANY_THROW(
      ops::Softmax(tape.Constant(Tensor::Vector({1.0, std::nan("")}))));
}

TEST(OpsForwardTest, EmbeddingSelectsRows) {
  Tape tape(false);
  Var table = tape.Constant(Tensor({3, 2}, {0, 0, 1, 2, 3, 4}));
  const std::vector<std::int32_t> ids{2, 0, 1};
  Tensor e = Values(ops::Embedding(table, ids));
  EXPECT_EQ(e.shape(), (Shape{3, 2}));
  EXPECT_EQ(e.at(0, 1), 4);
  EXPECT_EQ(e.at(1, 0), 0);
  EXPECT_EQ(e.at(2, 0), 1);
  const std::vector<std::int32_t> bad{3};
  EXPECT_THROW(ops::Embedding(table, bad), ShapeError);
}

TEST(OpsForwardTest, EmbeddingPaddingRowGetsNoGradient) {
  Tensor table({3, 2}, 1.0);
  Tape tape;
  const std::vector<std::int32_t> ids{0, 1, 0};
  tape.Backward(ops::Sum(ops::Reshape(ops::Embedding(tape.Param(table), ids),
                                      {6})));
  EXPECT_EQ(table.grad()[0], 0.0);
  EXPECT_EQ(table.grad()[1], 0.0);
  EXPECT_EQ(table.grad()[2], 1.0);
  EXPECT_EQ(table.grad()[4], 0.0);
}

TEST(OpsForwardTest, DropoutIsIdentityAtInferenceAndUnbiasedInTraining) {
  std::mt19937_64 rng(1);
  Tape tape(false);
  Var x = tape.Constant(Tensor({20000}, 1.0));
  Tensor same = Values(ops::Dropout(x, 0.2, false, rng));
  EXPECT_EQ(same[17], 1.0);
  Tensor dropped = Values(ops::Dropout(x, 0.2, true, rng));
  double mean = 0.0;
  std::size_t zeros = 0;
  for (double v : dropped.values()) {
    mean += v;
    zeros += v == 0.0;
  }
  mean /= static_cast<double>(dropped.size());
  EXPECT_NEAR(mean, 1.0, 0.03);
  EXPECT_NEAR(static_cast<double>(zeros) / dropped.size(), 0.2, 0.01);
}

TEST(OpsForwardTest, NormalizeRowsAndFrobenius) {
  Tape tape(false);
  Tensor n = Values(ops::NormalizeRows(tape.Constant(Tensor({2, 2}, {3, 4, 0, 2}))));
  EXPECT_NEAR(n.at(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(n.at(1, 1), 1.0, 1e-15);
  EXPECT_THROW(ops::NormalizeRows(tape.Constant(Tensor({2, 2}, {1, 1, 0, 0}))),
               ShapeError);
  EXPECT_NEAR(ops::FrobeniusNorm(tape.Constant(Tensor({2, 2}, {1, 2, 2, 4})))
                  .scalar(),
              5.0, 1e-15);
}

TEST(OpsForwardTest, FrobeniusGradientAtZeroIsZero) {
  Tensor m({2, 2}, 0.0);
  Tape tape;
  tape.Backward(ops::FrobeniusNorm(tape.Param(m)));
  for (double g : m.grad()) EXPECT_EQ(g, 0.0);
}

TEST(OpsForwardTest, NegLogSoftmaxFirstClampsAndCounts) {
  Tape tape(false);
  std::size_t clamped = 0;
  Var loss = ops::NegLogSoftmaxFirst(
      tape.Constant(Tensor::Vector({-1000, 0})), 1e-12, &clamped);
  EXPECT_NEAR(loss.scalar(), -std::log(1e-12), 1e-9);
  EXPECT_EQ(clamped, 1u);
  Var third = ops::NegLogSoftmaxFirst(tape.Constant(Tensor::Vector({0, 0, 0})));
  EXPECT_NEAR(third.scalar(), std::log(3.0), 1e-12);
}

TEST(OpsForwardTest, AttentionPoolWeightsAreSimplex) {
  std::mt19937_64 rng(9);
  Tape tape(false);
  auto pool = ops::AdditiveAttentionPool(
      tape.Constant(RandomTensor({5, 4}, rng)),
      tape.Constant(RandomTensor({3, 4}, rng)),
      tape.Constant(RandomTensor({3}, rng)),
      tape.Constant(RandomTensor({3}, rng)));
  double sum = 0.0;
  for (double w : pool.weights.value().values()) {
    EXPECT_GE(w, 0.0);
    sum += w;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(pool.pooled.shape(), Shape{4});
}

TEST(OpsForwardTest, ShapeErrorsAreReported) {
  Tape tape(false);
  Var a = tape.Constant(Tensor({2, 3}));
  Var b = tape.Constant(Tensor({2, 3}));
  EXPECT_THROW(ops::MatMul(a, b), ShapeError);
  EXPECT_THROW(ops::Dot(tape.Constant(Tensor({2})), tape.Constant(Tensor({3}))),
               ShapeError);
  EXPECT_THROW(ops::Add(a, tape.Constant(Tensor({3, 2}))), ShapeError);
  std::vector<Var> rows{tape.Constant(Tensor({2})), tape.Constant(Tensor({3}))};
  EXPECT_THROW(ops::Stack(rows), ShapeError);
}

TEST(OpsGradientTest, Linear) {
  ExpectGradients({{4, 3}, {2, 3}, {2}}, [](Tape&, std::vector<Var>& v) {
    return ops::Linear(v[0], v[1], v[2]);
  });
  ExpectGradients({{3}, {2, 3}}, [](Tape&, std::vector<Var>& v) {
    return ops::Linear(v[0], v[1]);
  });
}

TEST(OpsGradientTest, MatMulMatVecTranspose) {
  ExpectGradients({{3, 4}, {4, 2}}, [](Tape&, std::vector<Var>& v) {
    return ops::MatMul(v[0], v[1]);
  });
  ExpectGradients({{3, 4}, {4}}, [](Tape&, std::vector<Var>& v) {
    return ops::MatVec(v[0], v[1]);
  });
  ExpectGradients({{3, 4}}, [](Tape&, std::vector<Var>& v) {
    return ops::Transpose(v[0]);
  });
}

TEST(OpsGradientTest, ConvWithAndWithoutRelu) {
  ExpectGradients({{5, 3}, {4, 3, 3}, {4}}, [](Tape&, std::vector<Var>& v) {
    return ops::Conv1dSame(v[0], v[1], v[2], ops::Activation::kNone);
  });
  ExpectGradients({{6, 2}, {3, 5, 2}, {3}}, [](Tape&, std::vector<Var>& v) {
    return ops::Conv1dSame(v[0], v[1], v[2], ops::Activation::kRelu);
  });
}

TEST(OpsGradientTest, Elementwise) {
  ExpectGradients({{3, 2}, {3, 2}}, [](Tape&, std::vector<Var>& v) {
    return ops::Sub(ops::Add(v[0], v[1]), ops::Scale(v[1], 3.0));
  });
  ExpectGradients({{5}, {1}}, [](Tape&, std::vector<Var>& v) {
    return ops::ScaleBy(ops::AddBroadcast(v[0], v[1]), v[1]);
  });
  ExpectGradients({{6}}, [](Tape&, std::vector<Var>& v) {
    return ops::Tanh(ops::AddScalar(v[0], 0.3));
  });
  ExpectGradients({{7}}, [](Tape&, std::vector<Var>& v) {
    return ops::Relu(v[0]);
  });
}

TEST(OpsGradientTest, SoftmaxPlainAndMasked) {
  ExpectGradients({{5}}, [](Tape&, std::vector<Var>& v) {
    return ops::Softmax(v[0]);
  });
  ExpectGradients({{5}}, [](Tape&, std::vector<Var>& v) {
    return ops::Softmax(v[0], {true, false, true, true, false});
  });
}

TEST(OpsGradientTest, Reductions) {
  ExpectGradients({{4}, {4}}, [](Tape&, std::vector<Var>& v) {
    return ops::Dot(v[0], v[1]);
  });
  ExpectGradients({{3, 4}}, [](Tape&, std::vector<Var>& v) {
    return ops::Sum(ops::Reshape(v[0], {12}));
  });
  ExpectGradients({{3, 4}}, [](Tape&, std::vector<Var>& v) {
    return ops::MeanRows(v[0]);
  });
  ExpectGradients({{3}, {3, 4}}, [](Tape&, std::vector<Var>& v) {
    return ops::WeightedRows(v[0], v[1]);
  });
  ExpectGradients({{4}}, [](Tape&, std::vector<Var>& v) {
    return ops::Element(v[0], 2);
  });
}

TEST(OpsGradientTest, ConcatStackRow) {
  ExpectGradients({{2}, {3}, {1}}, [](Tape&, std::vector<Var>& v) {
    return ops::Concat(v);
  });
  ExpectGradients({{3}, {3}}, [](Tape&, std::vector<Var>& v) {
    return ops::Stack(v);
  });
  ExpectGradients({{4, 3}}, [](Tape&, std::vector<Var>& v) {
    return ops::Add(ops::Row(v[0], 0), ops::Row(v[0], 3));
  });
}

// Padding lookups are excluded: row 0 is frozen by design.
TEST(OpsGradientTest, EmbeddingLookup) {
  const std::vector<std::int32_t> ids{3, 1, 3, 2};
  ExpectGradients({{4, 3}}, [&](Tape&, std::vector<Var>& v) {
    return ops::Embedding(v[0], ids);
  });
}

TEST(OpsGradientTest, NormalizeAndFrobenius) {
  ExpectGradients({{3, 4}}, [](Tape&, std::vector<Var>& v) {
    return ops::NormalizeRows(v[0]);
  });
  ExpectGradients({{3, 3}}, [](Tape&, std::vector<Var>& v) {
    return ops::FrobeniusNorm(v[0]);
  });
}

TEST(OpsGradientTest, NegLogSoftmaxFirst) {
  ExpectGradients({{4}}, [](Tape&, std::vector<Var>& v) {
    return ops::NegLogSoftmaxFirst(v[0]);
  });
}

TEST(OpsGradientTest, AdditiveAttentionPool) {
  ExpectGradients({{4, 3}, {2, 3}, {2}, {2}}, [](Tape&, std::vector<Var>& v) {
    auto pool = ops::AdditiveAttentionPool(v[0], v[1], v[2], v[3]);
    return ops::Concat(std::vector<Var>{pool.weights, pool.pooled});
  });
}

}  // namespace
}  // namespace anrs
