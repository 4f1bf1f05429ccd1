// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REALSR_AUTOGRAD_HPP_
#define REALSR_AUTOGRAD_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "realsr/tensor.hpp"

namespace realsr {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  // Gradient buffer of a parent, allocated on first use; nullptr when the
  // parent does not require grad.
  static Tensor* sink(Node& node);
};

}  // namespace detail

// Handle to a value in the reverse-mode graph. Copies share the node.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  // Leaf that accumulates gradients across backward() calls.
  static Var parameter(Tensor value);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  // Direct write access for optimisers and loaders. Must not change the shape.
  Tensor& mutable_value() { return node_->value; }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Accumulated gradient; zeros when nothing has flowed in yet.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }

  // Back-propagates from a single-element value. Intermediate nodes release
  // their closures afterwards, so a graph can be differentiated once.
  void backward() const;

  // Same value, no history.
  Var detach() const { return constant(node_->value); }

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Var make_op(Tensor, std::vector<Var>, std::function<void(detail::Node&)>);

  std::shared_ptr<detail::Node> node_;
};

// Records an op result. If no parent requires grad (or a NoGradGuard is
// active) the result is a constant and `backward` is dropped.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(detail::Node&)> backward);

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace realsr

#endif  // REALSR_AUTOGRAD_HPP_
