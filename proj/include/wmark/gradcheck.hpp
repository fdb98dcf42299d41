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
#include <functional>
#include <string>
#include <vector>

#include "wmark/autograd.hpp"

namespace wmark::tg {

struct GradCheckInput {
  std::string name;
  Var var;  // leaf that requires grad; perturbed in place and restored
};

struct GradCheckOptions {
  double h = 1e-5;
  double tolerance = 1e-4;
  // 0 checks every element; otherwise a seeded sample of this many per tensor.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t refined = 0;  // entries re-estimated at a smaller step
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckResult> results;
  bool passed() const;
  double max_rel_error() const;
};

// Rebuilds the loss from the current input values. Must be deterministic.
using GraphBuilder = std::function<Var()>;

// Compares backward() against central differences. Per element the error is
// |a - n| / max(|a|, |n|, 1e-3 * max|a| over the tensor, 1e-6 * max(1, |loss|)).
// An entry that fails while its one-sided differences disagree (the step
// straddles a kink such as relu at zero) is re-estimated at h/10, then h/100.
// Throws NumericError if any loss evaluation is non-finite.
GradCheckReport finite_diff_check(const GraphBuilder& build,
                                  const std::vector<GradCheckInput>& inputs,
                                  const GradCheckOptions& options = {});

}  // namespace wmark::tg
