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

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "anrs/errors.hpp"

namespace anrs::ops {
namespace {

using ConstMap = Eigen::Map<const Eigen::VectorXd>;
using Map = Eigen::Map<Eigen::VectorXd>;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

double DotN(const double* a, const double* b, std::size_t n) {
  if (n == 0) return 0.0;
  return ConstMap(a, static_cast<Eigen::Index>(n))
      .dot(ConstMap(b, static_cast<Eigen::Index>(n)));
}

// y += alpha * x
void AxpyN(double alpha, const double* x, double* y, std::size_t n) {
  if (n == 0 || alpha == 0.0) return;
  Map(y, static_cast<Eigen::Index>(n)) +=
      alpha * ConstMap(x, static_cast<Eigen::Index>(n));
}

bool AnyRequiresGrad(std::initializer_list<Var> vars) {
  for (const Var& v : vars) {
    if (v.tape->requires_grad(v)) return true;
  }
  return false;
}

void CheckSameTape(std::initializer_list<Var> vars) {
  const Tape* tape = vars.begin()->tape;
  for (const Var& v : vars) {
    if (v.tape != tape) throw std::logic_error("vars from different tapes");
  }
}

[[noreturn]] void Fail(const std::string& op, const std::string& what) {
  throw ShapeError(op + ": " + what);
}

void RequireRank(const std::string& op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    Fail(op, "expected rank " + std::to_string(rank) + ", got shape " +
                 ShapeToString(t.shape()));
  }
}

void RequireSameShape(const std::string& op, const Tensor& a,
                      const Tensor& b) {
  if (a.shape() != b.shape()) {
    Fail(op, "shape mismatch " + ShapeToString(a.shape()) + " vs " +
                 ShapeToString(b.shape()));
  }
}

void RequireScalar(const std::string& op, const Tensor& t) {
  if (t.size() != 1) {
    Fail(op, "expected a single-element tensor, got " +
                 ShapeToString(t.shape()));
  }
}

}  // namespace

Var Embedding(Var table, std::span<const std::int32_t> ids) {
  Tape& tape = *table.tape;
  const Tensor& w = table.value();
  RequireRank("Embedding", w, 2);
  const std::size_t rows = w.dim(0);
  const std::size_t d = w.dim(1);
  std::vector<std::int32_t> index(ids.begin(), ids.end());
  Tensor out(Shape{index.size(), d});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= rows) {
      Fail("Embedding", "token id " + std::to_string(index[i]) +
                            " outside table of " + std::to_string(rows));
    }
    std::copy_n(w.row(static_cast<std::size_t>(index[i])).data(), d,
                out.row(i).data());
  }
  return tape.Push(std::move(out), AnyRequiresGrad({table}),
                   [table, index = std::move(index), d](Tape& t, Var self) {
                     auto g = t.grad(self);
                     auto gw = t.grad(table);
                     for (std::size_t i = 0; i < index.size(); ++i) {
                       if (index[i] == 0) continue;
                       AxpyN(1.0, g.data() + i * d,
                             gw.data() + static_cast<std::size_t>(index[i]) * d,
                             d);
                     }
                   });
}

Var Row(Var m, std::size_t index) {
  const Tensor& in = m.value();
  RequireRank("Row", in, 2);
  if (index >= in.dim(0)) Fail("Row", "row index out of range");
  const std::size_t cols = in.dim(1);
  Tensor out(Shape{cols});
  std::copy_n(in.row(index).data(), cols, out.data());
  return m.tape->Push(std::move(out), AnyRequiresGrad({m}),
                      [=](Tape& t, Var self) {
                        AxpyN(1.0, t.grad(self).data(),
                              t.grad(m).data() + index * cols, cols);
                      });
}

Var Dropout(Var x, double rate, bool training, std::mt19937_64& rng) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) Fail("Dropout", "rate must be < 1");
  Tape& tape = *x.tape;
  const Tensor& in = x.value();
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(in.size());
  for (double& m : mask) m = keep(rng) ? scale : 0.0;
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mask[i];
  return tape.Push(std::move(out), AnyRequiresGrad({x}),
                   [x, mask = std::move(mask)](Tape& t, Var self) {
                     auto g = t.grad(self);
                     auto gx = t.grad(x);
                     for (std::size_t i = 0; i < mask.size(); ++i) {
                       gx[i] += g[i] * mask[i];
                     }
                   });
}

Var Conv1dSame(Var input, Var kernel, Var bias, Activation activation) {
  CheckSameTape({input, kernel, bias});
  Tape& tape = *input.tape;
  const Tensor& in = input.value();
  const Tensor& k = kernel.value();
  const Tensor& b = bias.value();
  RequireRank("Conv1dSame", in, 2);
  RequireRank("Conv1dSame", k, 3);
  RequireRank("Conv1dSame", b, 1);
  const std::size_t steps = in.dim(0);
  const std::size_t depth = in.dim(1);
  const std::size_t filters = k.dim(0);
  const std::size_t width = k.dim(1);
  if (k.dim(2) != depth) {
    Fail("Conv1dSame", "kernel depth " + std::to_string(k.dim(2)) +
                           " does not match input width " +
                           std::to_string(depth));
  }
  if (width % 2 == 0) Fail("Conv1dSame", "window must be odd");
  if (b.dim(0) != filters) Fail("Conv1dSame", "bias length mismatch");
  if (steps == 0) Fail("Conv1dSame", "empty input");
  const std::size_t span = width * depth;
  const std::size_t half = width / 2;

  // Row t holds input rows t - half .. t + half side by side, zeros outside
  // the sequence, so the convolution is one matrix product with the kernel
  // viewed as filters x (width * depth).
  auto unfold = [=](const Tensor& x) {
    RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(steps),
                                     static_cast<Eigen::Index>(span));
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t w = 0; w < width; ++w) {
        if (t + w < half || t + w - half >= steps) continue;
        std::copy_n(x.data() + (t + w - half) * depth, depth,
                    cols.data() + t * span + w * depth);
      }
    }
    return cols;
  };
  auto kernel_matrix = [=](const double* data) {
    return ConstRowMatrixMap(data, static_cast<Eigen::Index>(filters),
                             static_cast<Eigen::Index>(span));
  };

  Tensor pre(Shape{steps, filters});
  RowMatrixMap pre_m(pre.data(), static_cast<Eigen::Index>(steps),
                     static_cast<Eigen::Index>(filters));
  pre_m.noalias() = unfold(in) * kernel_matrix(k.data()).transpose();
  pre_m.rowwise() += ConstMap(b.data(), static_cast<Eigen::Index>(filters)).transpose();
  const bool relu = activation == Activation::kRelu;
  Tensor out = pre;
  if (relu) {
    tape.NoteReluInput(pre.values());
    for (double& v : out.values()) v = std::max(v, 0.0);
  }
  return tape.Push(
      std::move(out), AnyRequiresGrad({input, kernel, bias}),
      [=, pre = std::move(pre)](Tape& t, Var self) {
        auto g = t.grad(self);
        RowMatrix gm = ConstRowMatrixMap(g.data(), static_cast<Eigen::Index>(steps),
                                         static_cast<Eigen::Index>(filters));
        if (relu) {
          for (std::size_t i = 0; i < pre.size(); ++i) {
            if (pre[i] <= 0.0) gm.data()[i] = 0.0;
          }
        }
        auto gb = t.grad(bias);
        Map(gb.data(), static_cast<Eigen::Index>(filters)) +=
            gm.colwise().sum().transpose();
        auto gk = t.grad(kernel);
        RowMatrixMap(gk.data(), static_cast<Eigen::Index>(filters),
                     static_cast<Eigen::Index>(span))
            .noalias() += gm.transpose() * unfold(input.value());
        auto gin = t.grad(input);
        const RowMatrix gcols = gm * kernel_matrix(kernel.value().data());
        for (std::size_t s = 0; s < steps; ++s) {
          for (std::size_t w = 0; w < width; ++w) {
            if (s + w < half || s + w - half >= steps) continue;
            AxpyN(1.0, gcols.data() + s * span + w * depth,
                  gin.data() + (s + w - half) * depth, depth);
          }
        }
      });
}

namespace {

Var LinearImpl(Var x, Var weight, const Var* bias) {
  Tape& tape = *x.tape;
  const Tensor& in = x.value();
  const Tensor& w = weight.value();
  RequireRank("Linear", w, 2);
  const bool vector_in = in.rank() == 1;
  if (!vector_in) RequireRank("Linear", in, 2);
  const std::size_t rows = vector_in ? 1 : in.dim(0);
  const std::size_t din = vector_in ? in.dim(0) : in.dim(1);
  const std::size_t dout = w.dim(0);
  if (w.dim(1) != din) {
    Fail("Linear", "weight " + ShapeToString(w.shape()) +
                       " does not accept input " + ShapeToString(in.shape()));
  }
  if (bias) {
    const Tensor& b = bias->value();
    RequireRank("Linear", b, 1);
    if (b.dim(0) != dout) Fail("Linear", "bias length mismatch");
  }
  Tensor out(vector_in ? Shape{dout} : Shape{rows, dout});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * din;
    for (std::size_t o = 0; o < dout; ++o) {
      out[r * dout + o] = DotN(w.data() + o * din, xr, din) +
                          (bias ? bias->value()[o] : 0.0);
    }
  }
  const bool needs = bias ? AnyRequiresGrad({x, weight, *bias})
                          : AnyRequiresGrad({x, weight});
  const Var b = bias ? *bias : Var{};
  const bool has_bias = bias != nullptr;
  return tape.Push(std::move(out), needs,
                   [=](Tape& t, Var self) {
                     auto g = t.grad(self);
                     auto gx = t.grad(x);
                     auto gw = t.grad(weight);
                     const Tensor& xin = x.value();
                     const Tensor& wv = weight.value();
                     for (std::size_t r = 0; r < rows; ++r) {
                       for (std::size_t o = 0; o < dout; ++o) {
                         const double go = g[r * dout + o];
                         if (go == 0.0) continue;
                         AxpyN(go, wv.data() + o * din, gx.data() + r * din,
                               din);
                         AxpyN(go, xin.data() + r * din, gw.data() + o * din,
                               din);
                       }
                     }
                     if (has_bias) {
                       auto gb = t.grad(b);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t o = 0; o < dout; ++o) {
                           gb[o] += g[r * dout + o];
                         }
                       }
                     }
                   });
}

}  // namespace

Var Linear(Var x, Var weight) { return LinearImpl(x, weight, nullptr); }

Var Linear(Var x, Var weight, Var bias) {
  return LinearImpl(x, weight, &bias);
}

Var MatMul(Var a, Var b) {
  CheckSameTape({a, b});
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  RequireRank("MatMul", av, 2);
  RequireRank("MatMul", bv, 2);
  const std::size_t m = av.dim(0), kk = av.dim(1), n = bv.dim(1);
  if (bv.dim(0) != kk) {
    Fail("MatMul", ShapeToString(av.shape()) + " x " +
                       ShapeToString(bv.shape()));
  }
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < kk; ++p) {
      AxpyN(av.at(i, p), bv.data() + p * n, out.data() + i * n, n);
    }
  }
  return a.tape->Push(std::move(out), AnyRequiresGrad({a, b}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto ga = t.grad(a);
                        auto gb = t.grad(b);
                        const Tensor& A = a.value();
                        const Tensor& B = b.value();
                        for (std::size_t i = 0; i < m; ++i) {
                          for (std::size_t p = 0; p < kk; ++p) {
                            ga[i * kk + p] +=
                                DotN(g.data() + i * n, B.data() + p * n, n);
                            AxpyN(A.at(i, p), g.data() + i * n,
                                  gb.data() + p * n, n);
                          }
                        }
                      });
}

Var MatVec(Var m, Var x) {
  const Tensor& mv = m.value();
  RequireRank("MatVec", mv, 2);
  RequireRank("MatVec", x.value(), 1);
  return Linear(x, m);
}

Var Transpose(Var m) {
  const Tensor& in = m.value();
  RequireRank("Transpose", in, 2);
  const std::size_t r = in.dim(0), c = in.dim(1);
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = in.at(i, j);
  }
  return m.tape->Push(std::move(out), AnyRequiresGrad({m}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gm = t.grad(m);
                        for (std::size_t i = 0; i < r; ++i) {
                          for (std::size_t j = 0; j < c; ++j) {
                            gm[i * c + j] += g[j * r + i];
                          }
                        }
                      });
}

Var Reshape(Var x, Shape shape) {
  Tensor out = x.value().Reshaped(std::move(shape));
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gx = t.grad(x);
                        AxpyN(1.0, g.data(), gx.data(), g.size());
                      });
}

Var Add(Var a, Var b) {
  CheckSameTape({a, b});
  RequireSameShape("Add", a.value(), b.value());
  Tensor out = a.value();
  AxpyN(1.0, b.value().data(), out.data(), out.size());
  return a.tape->Push(std::move(out), AnyRequiresGrad({a, b}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        AxpyN(1.0, g.data(), t.grad(a).data(), g.size());
                        AxpyN(1.0, g.data(), t.grad(b).data(), g.size());
                      });
}

Var Sub(Var a, Var b) {
  CheckSameTape({a, b});
  RequireSameShape("Sub", a.value(), b.value());
  Tensor out = a.value();
  AxpyN(-1.0, b.value().data(), out.data(), out.size());
  return a.tape->Push(std::move(out), AnyRequiresGrad({a, b}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        AxpyN(1.0, g.data(), t.grad(a).data(), g.size());
                        AxpyN(-1.0, g.data(), t.grad(b).data(), g.size());
                      });
}

Var AddBroadcast(Var x, Var s) {
  CheckSameTape({x, s});
  RequireScalar("AddBroadcast", s.value());
  Tensor out = x.value();
  const double c = s.value()[0];
  for (double& v : out.values()) v += c;
  return x.tape->Push(std::move(out), AnyRequiresGrad({x, s}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        AxpyN(1.0, g.data(), t.grad(x).data(), g.size());
                        double total = 0.0;
                        for (double v : g) total += v;
                        t.grad(s)[0] += total;
                      });
}

Var ScaleBy(Var x, Var s) {
  CheckSameTape({x, s});
  RequireScalar("ScaleBy", s.value());
  const double c = s.value()[0];
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->Push(std::move(out), AnyRequiresGrad({x, s}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        const Tensor& xv = x.value();
                        AxpyN(s.value()[0], g.data(), t.grad(x).data(),
                              g.size());
                        t.grad(s)[0] += DotN(g.data(), xv.data(), g.size());
                      });
}

Var Scale(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        AxpyN(c, g.data(), t.grad(x).data(), g.size());
                      });
}

Var AddScalar(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.values()) v += c;
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        AxpyN(1.0, g.data(), t.grad(x).data(), g.size());
                      });
}

Var Tanh(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::tanh(v);
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gx = t.grad(x);
                        const Tensor& y = t.value(self);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          gx[i] += g[i] * (1.0 - y[i] * y[i]);
                        }
                      });
}

Var Relu(Var x) {
  const Tensor& in = x.value();
  x.tape->NoteReluInput(in.values());
  Tensor out = in;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gx = t.grad(x);
                        const Tensor& xin = x.value();
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          if (xin[i] > 0.0) gx[i] += g[i];
                        }
                      });
}

Var Softmax(Var x) {
  return Softmax(x, std::vector<bool>(x.size(), true));
}

Var Softmax(Var x, const std::vector<bool>& mask) {
  const Tensor& in = x.value();
  RequireRank("Softmax", in, 1);
  const std::size_t n = in.size();
  if (n == 0) Fail("Softmax", "empty input");
  if (mask.size() != n) Fail("Softmax", "mask length mismatch");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(in[i])) throw NumericalError("Softmax: NaN input");
    if (mask[i]) top = std::max(top, in[i]);
  }
  if (top == -std::numeric_limits<double>::infinity()) {
    Fail("Softmax", "every position is masked");
  }
  Tensor out(in.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(in[i] - top);
    total += out[i];
  }
  for (double& v : out.values()) v /= total;
  return x.tape->Push(std::move(out), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gx = t.grad(x);
                        const Tensor& y = t.value(self);
                        const double inner = DotN(g.data(), y.data(), n);
                        for (std::size_t i = 0; i < n; ++i) {
                          gx[i] += y[i] * (g[i] - inner);
                        }
                      });
}

Var Dot(Var a, Var b) {
  CheckSameTape({a, b});
  RequireSameShape("Dot", a.value(), b.value());
  const std::size_t n = a.size();
  Tensor out =
      Tensor::Scalar(DotN(a.value().data(), b.value().data(), n));
  return a.tape->Push(std::move(out), AnyRequiresGrad({a, b}),
                      [=](Tape& t, Var self) {
                        const double g = t.grad(self)[0];
                        AxpyN(g, b.value().data(), t.grad(a).data(), n);
                        AxpyN(g, a.value().data(), t.grad(b).data(), n);
                      });
}

Var Sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape->Push(Tensor::Scalar(total), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        const double g = t.grad(self)[0];
                        for (double& v : t.grad(x)) v += g;
                      });
}

Var Element(Var x, std::size_t index) {
  if (index >= x.size()) Fail("Element", "index out of range");
  return x.tape->Push(Tensor::Scalar(x.value()[index]), AnyRequiresGrad({x}),
                      [=](Tape& t, Var self) {
                        t.grad(x)[index] += t.grad(self)[0];
                      });
}

Var MeanRows(Var m) {
  const Tensor& in = m.value();
  RequireRank("MeanRows", in, 2);
  const std::size_t rows = in.dim(0), cols = in.dim(1);
  if (rows == 0) Fail("MeanRows", "no rows");
  Tensor out(Shape{cols});
  for (std::size_t r = 0; r < rows; ++r) {
    AxpyN(1.0, in.data() + r * cols, out.data(), cols);
  }
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& v : out.values()) v *= inv;
  return m.tape->Push(std::move(out), AnyRequiresGrad({m}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gm = t.grad(m);
                        for (std::size_t r = 0; r < rows; ++r) {
                          AxpyN(inv, g.data(), gm.data() + r * cols, cols);
                        }
                      });
}

Var WeightedRows(Var weights, Var m) {
  CheckSameTape({weights, m});
  const Tensor& w = weights.value();
  const Tensor& in = m.value();
  RequireRank("WeightedRows", w, 1);
  RequireRank("WeightedRows", in, 2);
  const std::size_t rows = in.dim(0), cols = in.dim(1);
  if (w.dim(0) != rows) Fail("WeightedRows", "weight count mismatch");
  Tensor out(Shape{cols});
  for (std::size_t r = 0; r < rows; ++r) {
    AxpyN(w[r], in.data() + r * cols, out.data(), cols);
  }
  return m.tape->Push(std::move(out), AnyRequiresGrad({weights, m}),
                      [=](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gw = t.grad(weights);
                        auto gm = t.grad(m);
                        const Tensor& wv = weights.value();
                        const Tensor& mv = m.value();
                        for (std::size_t r = 0; r < rows; ++r) {
                          gw[r] += DotN(g.data(), mv.data() + r * cols, cols);
                          AxpyN(wv[r], g.data(), gm.data() + r * cols, cols);
                        }
                      });
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) Fail("Concat", "nothing to concatenate");
  std::vector<Var> inputs(parts.begin(), parts.end());
  std::size_t total = 0;
  bool needs = false;
  for (const Var& p : inputs) {
    if (p.tape != inputs.front().tape) {
      throw std::logic_error("vars from different tapes");
    }
    RequireRank("Concat", p.value(), 1);
    total += p.size();
    needs = needs || p.tape->requires_grad(p);
  }
  Tensor out(Shape{total});
  std::size_t offset = 0;
  for (const Var& p : inputs) {
    std::copy_n(p.value().data(), p.size(), out.data() + offset);
    offset += p.size();
  }
  return inputs.front().tape->Push(
      std::move(out), needs, [inputs = std::move(inputs)](Tape& t, Var self) {
        auto g = t.grad(self);
        std::size_t at = 0;
        for (const Var& p : inputs) {
          const std::size_t n = p.size();
          if (t.requires_grad(p)) AxpyN(1.0, g.data() + at, t.grad(p).data(), n);
          at += n;
        }
      });
}

Var Stack(std::span<const Var> rows) {
  if (rows.empty()) Fail("Stack", "no rows");
  std::vector<Var> inputs(rows.begin(), rows.end());
  const Tensor& first = inputs.front().value();
  RequireRank("Stack", first, 1);
  const std::size_t cols = first.dim(0);
  bool needs = false;
  Tensor out(Shape{inputs.size(), cols});
  for (std::size_t r = 0; r < inputs.size(); ++r) {
    const Tensor& v = inputs[r].value();
    RequireSameShape("Stack", first, v);
    std::copy_n(v.data(), cols, out.data() + r * cols);
    needs = needs || inputs[r].tape->requires_grad(inputs[r]);
  }
  return inputs.front().tape->Push(
      std::move(out), needs,
      [inputs = std::move(inputs), cols](Tape& t, Var self) {
        auto g = t.grad(self);
        for (std::size_t r = 0; r < inputs.size(); ++r) {
          if (!t.requires_grad(inputs[r])) continue;
          AxpyN(1.0, g.data() + r * cols, t.grad(inputs[r]).data(), cols);
        }
      });
}

Var NormalizeRows(Var m) {
  const Tensor& in = m.value();
  RequireRank("NormalizeRows", in, 2);
  const std::size_t rows = in.dim(0), cols = in.dim(1);
  std::vector<double> norms(rows);
  Tensor out = in;
  for (std::size_t r = 0; r < rows; ++r) {
    norms[r] = std::sqrt(DotN(in.data() + r * cols, in.data() + r * cols, cols));
    if (norms[r] == 0.0) {
      Fail("NormalizeRows", "row " + std::to_string(r) + " is zero");
    }
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= norms[r];
  }
  return m.tape->Push(std::move(out), AnyRequiresGrad({m}),
                      [=, norms = std::move(norms)](Tape& t, Var self) {
                        auto g = t.grad(self);
                        auto gm = t.grad(m);
                        const Tensor& y = t.value(self);
                        for (std::size_t r = 0; r < rows; ++r) {
                          const double* yr = y.data() + r * cols;
                          const double* gr = g.data() + r * cols;
                          const double proj = DotN(yr, gr, cols);
                          for (std::size_t c = 0; c < cols; ++c) {
                            gm[r * cols + c] += (gr[c] - yr[c] * proj) / norms[r];
                          }
                        }
                      });
}

Var FrobeniusNorm(Var m) {
  const Tensor& in = m.value();
  const double norm = std::sqrt(DotN(in.data(), in.data(), in.size()));
  return m.tape->Push(Tensor::Scalar(norm), AnyRequiresGrad({m}),
                      [=](Tape& t, Var self) {
                        if (norm == 0.0) return;
                        const double g = t.grad(self)[0];
                        AxpyN(g / norm, m.value().data(), t.grad(m).data(),
                              m.size());
                      });
}

Var NegLogSoftmaxFirst(Var scores, double floor, std::size_t* clamped) {
  const Tensor& s = scores.value();
  RequireRank("NegLogSoftmaxFirst", s, 1);
  const std::size_t n = s.size();
  if (n == 0) Fail("NegLogSoftmaxFirst", "empty scores");
  double top = s[0];
  for (double v : s.values()) top = std::max(top, v);
  double total = 0.0;
  for (double v : s.values()) total += std::exp(v - top);
  const double log_sum = top + std::log(total);
  const double log_p = s[0] - log_sum;
  const bool floored = log_p < std::log(floor);
  if (floored && clamped) ++*clamped;
  const double value = floored ? -std::log(floor) : -log_p;
  return scores.tape->Push(
      Tensor::Scalar(value), !floored && AnyRequiresGrad({scores}),
      [=](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        auto gs = t.grad(scores);
        const Tensor& sv = scores.value();
        for (std::size_t i = 0; i < n; ++i) {
          const double p = std::exp(sv[i] - log_sum);
          gs[i] += g * (p - (i == 0 ? 1.0 : 0.0));
        }
      });
}

AttentionPool AdditiveAttentionPool(Var vectors, Var proj, Var bias,
                                    Var query) {
  const Tensor& c = vectors.value();
  RequireRank("AdditiveAttentionPool", c, 2);
  if (c.dim(0) == 0) {
    Fail("AdditiveAttentionPool", "attention over an empty set");
  }
  Var hidden = Tanh(Linear(vectors, proj, bias));
  Var scores = MatVec(hidden, query);
  Var weights = Softmax(scores);
  return AttentionPool{weights, WeightedRows(weights, vectors)};
}

}  // namespace anrs::ops
