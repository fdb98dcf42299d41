// Copyright 2026 The wmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wmark/tensor.hpp"

// Reverse-mode differentiation over a small, fixed set of layers. A graph is
// built fresh for every forward pass; parameters are long-lived leaf nodes.
namespace wmark::tg {

class Node;
using Var = std::shared_ptr<Node>;

// Accumulates the gradient of `self` into its parents.
using BackwardFn = std::function<void(Node& self)>;

class Node {
 public:
  Node(std::string op, Tensor value, std::vector<Var> parents, bool requires_grad)
      : value(std::move(value)), parents(std::move(parents)), op(std::move(op)),
        requires_grad(requires_grad) {}

  Tensor value;
  std::optional<Tensor> grad;
  std::vector<Var> parents;
  std::string op;
  bool requires_grad;
  BackwardFn backward_fn;
  bool backward_done = false;

  // Gradient buffer, zero-initialised on first access.
  Tensor& grad_buffer();
  void zero_grad() { grad.reset(); }
};

enum class Mode { kTrain, kInfer };

Var constant(Tensor value);
Var parameter(Tensor value);
Var detach(const Var& x);

// Builds an op node. Parents that do not require gradients are skipped during
// backward; the node itself requires grad iff any parent does.
Var make_op(std::string op, Tensor value, std::vector<Var> parents, BackwardFn fn);

// Reverse topological accumulation from a one-element loss. Throws on a
// non-scalar loss, on a cycle, and on a second call for the same loss.
void backward(const Var& loss);

// ---- layers ---------------------------------------------------------------

// x: N x Cin x H x W, w: Cout x Cin x k x k, b: Cout. Zero padding, odd k.
Var conv2d(const Var& x, const Var& w, const Var& b, std::size_t stride = 1,
           std::size_t pad = 0);

struct BatchNormState {
  std::vector<double> running_mean;  // empty until populated
  std::vector<double> running_var;   // unbiased batch variance, EMA
  double momentum = 0.1;

  bool populated() const { return !running_mean.empty(); }
  // Running statistics at the conventional starting point (mean 0, var 1).
  void reset(std::size_t channels);
};

inline constexpr double kBatchNormEps = 1e-5;

// Per-channel normalisation over N x H x W. Train mode uses batch statistics
// and updates `state`; infer mode reads `state`.
Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta,
                BatchNormState& state, Mode mode, double eps = kBatchNormEps);
// Inference-mode normalisation that never touches `state`.
Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta,
                const BatchNormState& state, double eps = kBatchNormEps);

// max(0, x); the subgradient at exactly 0 is 0.
Var relu(const Var& x);
Var sigmoid(const Var& x);

// x: N x F, w: G x F, b: G -> N x G.
Var affine(const Var& x, const Var& w, const Var& b);

// N x C x H x W -> N x C.
Var global_avg_pool(const Var& x);

// Stacks `a` then `b` along axis 1. Works for any rank >= 2 with equal other axes.
Var concat_channels(const Var& a, const Var& b);

Var add(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var sum(const Var& x);

// ---- losses (all return a one-element tensor) -----------------------------

Var mse_loss(const Var& a, const Var& b);
// Mean over elements of max(x,0) - x*t + log(1 + exp(-|x|)); targets in {0,1}.
Var bce_logits_loss(const Var& logits, const Tensor& targets);
// logits: N x K; mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(const Var& logits, const std::vector<std::size_t>& labels);

}  // namespace wmark::tg
