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

#ifndef ANRS_TAPE_HPP_
#define ANRS_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "anrs/tensor.hpp"

namespace anrs {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid while the tape
// lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double scalar() const { return value()[0]; }
};

// Records executed operations in order so that adjoints can be replayed in
// reverse. A tape is confined to one thread; independent tapes share nothing
// except read-only parameter values.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  // With record == false no backward closures are kept (inference mode).
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var Constant(Tensor value);
  // Leaf bound to a parameter. Adjoints accumulate straight into
  // param.grad(). Repeated calls with the same parameter return the same leaf.
  Var Param(Tensor& param);

  // Output of an operation. requires_grad is true when any input requires it.
  Var Push(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Adjoint buffer of v. Only valid during Backward().
  std::span<double> grad(Var v);

  // Seeds d(output)/d(output) = 1 and replays adjoints in reverse order.
  void Backward(Var output);

  std::size_t size() const { return nodes_.size(); }

  // Smallest |pre-activation| seen by any ReLU on this tape. Finite-difference
  // checks use it to avoid evaluating across a kink.
  double min_relu_margin() const { return min_relu_margin_; }
  void NoteReluInput(std::span<const double> pre_activation);

 private:
  struct Node {
    Tensor value;
    Tensor* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
    std::vector<double> adjoint;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> param_leaves_;
  double min_relu_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace anrs

#endif  // ANRS_TAPE_HPP_
