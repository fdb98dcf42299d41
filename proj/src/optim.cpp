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
#include "wmark/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wmark::tg {

Var ParamSet::add(std::string name, Tensor init) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  init.require_finite("parameter " + name);
  Tensor m1(init.shape(), 0.0), m2(init.shape(), 0.0);
  entries_.push_back({std::move(name), parameter(std::move(init)), std::move(m1), std::move(m2)});
  return entries_.back().param;
}

const Var& ParamSet::get(std::string_view name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return e.param;
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.param->value.size();
  return n;
}

void ParamSet::set_step(std::int64_t step) {
  if (step < 0) throw std::invalid_argument("step counter must be non-negative");
  step_ = step;
}

void ParamSet::zero_grad() {
  for (Entry& e : entries_) e.param->zero_grad();
}

void adam_step(ParamSet& params, double lr, double beta1, double beta2, double eps) {
  for (const auto& e : params.entries_) {
    if (!e.param->grad) throw std::logic_error("adam_step: parameter '" + e.name + "' has no gradient");
    e.param->grad->require_finite("gradient of " + e.name);
  }
  const std::int64_t t = params.step_ + 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (auto& e : params.entries_) {
    Tensor& p = e.param->value;
    const Tensor& g = *e.param->grad;
    for (std::size_t i = 0; i < p.size(); ++i) {
      e.m1[i] = beta1 * e.m1[i] + (1.0 - beta1) * g[i];
      e.m2[i] = beta2 * e.m2[i] + (1.0 - beta2) * g[i] * g[i];
      const double mhat = e.m1[i] / c1;
      const double vhat = e.m2[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    e.param->zero_grad();
  }
  params.step_ = t;
}

}  // namespace wmark::tg
