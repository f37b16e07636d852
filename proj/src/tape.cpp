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

#include "anrs/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "anrs/errors.hpp"

namespace anrs {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, false, {}, {}});
  return Var{this, nodes_.size() - 1};
}

Var Tape::Param(Tensor& param) {
  auto it = param_leaves_.find(&param);
  if (it != param_leaves_.end()) return Var{this, it->second};
  nodes_.push_back(Node{Tensor(), &param, record_, {}, {}});
  param_leaves_.emplace(&param, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Var Tape::Push(Tensor value, bool requires_grad, BackwardFn backward) {
  const bool keep = record_ && requires_grad;
  nodes_.push_back(Node{std::move(value), nullptr, keep,
                        keep ? std::move(backward) : BackwardFn{}, {}});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& node = nodes_[v.id];
  return node.param ? *node.param : node.value;
}

std::span<double> Tape::grad(Var v) {
  Node& node = nodes_[v.id];
  if (node.param) return node.param->grad();
  if (node.adjoint.size() != node.value.size()) {
    node.adjoint.assign(node.value.size(), 0.0);
  }
  return node.adjoint;
}

void Tape::Backward(Var output) {
  if (!record_) throw std::logic_error("Backward on a non-recording tape");
  if (value(output).size() != 1) {
    throw ShapeError("Backward needs a scalar output, got shape " +
                     ShapeToString(value(output).shape()));
  }
  for (Node& node : nodes_) {
    if (!node.param) node.adjoint.assign(node.value.size(), 0.0);
  }
  grad(output)[0] += 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.backward) node.backward(*this, Var{this, i});
  }
}

void Tape::NoteReluInput(std::span<const double> pre_activation) {
  for (double x : pre_activation) {
    min_relu_margin_ = std::min(min_relu_margin_, std::abs(x));
  }
}

}  // namespace anrs
