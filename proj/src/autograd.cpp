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
#include "wmark/autograd.hpp"

#include <stdexcept>
#include <unordered_map>

namespace wmark::tg {

Tensor& Node::grad_buffer() {
  if (!grad) grad.emplace(value.shape(), 0.0);
  return *grad;
}

Var constant(Tensor value) {
  return std::make_shared<Node>("constant", std::move(value), std::vector<Var>{}, false);
}

Var parameter(Tensor value) {
  return std::make_shared<Node>("parameter", std::move(value), std::vector<Var>{}, true);
}

Var detach(const Var& x) { return constant(x->value); }

Var make_op(std::string op, Tensor value, std::vector<Var> parents, BackwardFn fn) {
  value.require_finite(op + " output");
  bool needs = false;
  for (const Var& p : parents) needs = needs || p->requires_grad;
  auto node = std::make_shared<Node>(std::move(op), std::move(value), std::move(parents), needs);
  if (needs) node->backward_fn = std::move(fn);
  return node;
}

namespace {

// Post-order over the parents relation; throws if a node is reached again
// while still on the DFS stack.
std::vector<Node*> topo_order(Node* root) {
  enum State : unsigned char { kOpen = 1, kDone = 2 };
  std::unordered_map<Node*, unsigned char> state;
  std::vector<Node*> order;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  state[root] = kOpen;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (!parent->requires_grad) continue;
      auto it = state.find(parent);
      if (it == state.end()) {
        state[parent] = kOpen;
        stack.emplace_back(parent, 0);
      } else if (it->second == kOpen) {
        throw std::logic_error("cycle detected in graph at op '" + parent->op + "'");
      }
    } else {
      state[node] = kDone;
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

void backward(const Var& loss) {
  if (!loss) throw std::invalid_argument("backward on null node");
  if (loss->value.size() != 1)
    throw ShapeError("backward needs a one-element loss, got shape " + shape_str(loss->value.shape()));
  if (loss->backward_done)
    throw std::logic_error("backward already ran on this loss; rebuild the graph");
  if (!loss->requires_grad) {
    loss->backward_done = true;
    return;
  }
  const std::vector<Node*> order = topo_order(loss.get());
  loss->grad_buffer().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->grad && node->backward_fn) node->backward_fn(*node);
  }
  loss->backward_done = true;
}

}  // namespace wmark::tg
