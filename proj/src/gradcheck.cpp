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
#include "wmark/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wmark/rng.hpp"

namespace wmark::tg {

bool GradCheckReport::passed() const {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& r : results) m = std::max(m, r.max_rel_error);
  return m;
}

namespace {

constexpr int kRefineLevels = 2;

double eval_loss(const GraphBuilder& build) {
  Var loss = build();
  if (loss->value.size() != 1) throw ShapeError("finite_diff_check: builder returned a non-scalar");
  loss->value.require_finite("finite-difference loss");
  return loss->value[0];
}

}  // namespace

GradCheckReport finite_diff_check(const GraphBuilder& build,
                                  const std::vector<GradCheckInput>& inputs,
                                  const GradCheckOptions& options) {
  if (!(options.h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be positive");
  for (const auto& in : inputs) {
    if (!in.var || !in.var->requires_grad)
      throw std::invalid_argument("finite_diff_check: input '" + in.name + "' does not require grad");
    in.var->zero_grad();
  }

  Var loss = build();
  loss->value.require_finite("finite-difference loss");
  const double f0 = loss->value[0];
  const double loss_mag = std::max(1.0, std::abs(f0));
  backward(loss);

  std::vector<Tensor> analytic;
  analytic.reserve(inputs.size());
  for (const auto& in : inputs) {
    analytic.push_back(in.var->grad ? *in.var->grad : Tensor(in.var->value.shape(), 0.0));
    analytic.back().require_finite("analytic gradient of " + in.name);
  }

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Tensor& value = inputs[t].var->value;
    const Tensor& a = analytic[t];

    std::vector<std::size_t> idx(value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_entries_per_tensor > 0 && idx.size() > options.max_entries_per_tensor) {
      for (std::size_t i = 0; i < options.max_entries_per_tensor; ++i)
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      idx.resize(options.max_entries_per_tensor);
    }

    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    const double floor = std::max(1e-3 * scale, 1e-6 * loss_mag);

    GradCheckResult r{inputs[t].name, 0.0, idx.size(), false};
    for (std::size_t i : idx) {
      const double saved = value[i];
      double err = 0.0;
      for (int level = 0; level <= kRefineLevels; ++level) {
        const double h = options.h * std::pow(0.1, level);
        value[i] = saved + h;
        const double fp = eval_loss(build);
        value[i] = saved - h;
        const double fm = eval_loss(build);
        value[i] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(a[i]), std::abs(numeric), floor});
        err = std::abs(a[i] - numeric) / denom;
        const double one_sided_gap = std::abs((fp - f0) - (f0 - fm)) / h;
        if (err <= options.tolerance || one_sided_gap <= options.tolerance * denom) break;
        if (level == 0) ++r.refined;
      }
      r.max_rel_error = std::max(r.max_rel_error, err);
    }
    r.passed = r.max_rel_error <= options.tolerance;
    report.results.push_back(std::move(r));
  }
  for (const auto& in : inputs) in.var->zero_grad();
  return report;
}

}  // namespace wmark::tg
