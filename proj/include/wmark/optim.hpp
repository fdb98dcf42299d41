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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wmark/autograd.hpp"

namespace wmark::tg {

// Named, insertion-ordered parameters with their Adam moment buffers.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Var param;
    Tensor m1;
    Tensor m2;
  };

  // Throws std::invalid_argument on a duplicate name.
  Var add(std::string name, Tensor init);
  const Var& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t step);

  void zero_grad();

 private:
  friend void adam_step(ParamSet&, double, double, double, double);
  std::vector<Entry> entries_;
  std::int64_t step_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Every parameter must hold a gradient; gradients are
// cleared afterwards and the step counter advances by one.
void adam_step(ParamSet& params, double lr, double beta1, double beta2, double eps);
inline void adam_step(ParamSet& params, const AdamConfig& c) {
  adam_step(params, c.lr, c.beta1, c.beta2, c.eps);
}

}  // namespace wmark::tg
