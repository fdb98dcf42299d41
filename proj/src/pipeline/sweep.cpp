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
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"
#include "wmark/pipeline.hpp"
#include "wmark/rng.hpp"

namespace wmark {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, p);
}

SweepSpec SweepSpec::standard() {
  SweepSpec s;
  const std::vector<double> shrink{1, 0.95, 0.9, 0.85, 0.8, 0.75};
  const std::vector<double> gain{1, 1.5, 2, 2.5, 3, 3.5};
  s.grids = {{TransformKind::kIdentity, {1}},
             {TransformKind::kCrop, shrink},
             {TransformKind::kResize, shrink},
             {TransformKind::kBrightness, gain},
             {TransformKind::kContrast, gain},
             {TransformKind::kJpeg, {100, 95, 90, 85, 80, 75}}};
  return s;
}

void SweepSpec::validate() const {
  if (repetitions < 1) throw std::invalid_argument("sweep repetitions must be >= 1");
  for (const auto& [kind, grid] : grids) {
    if (grid.empty()) throw std::invalid_argument(std::string("empty grid for ") + std::string(kind_name(kind)));
    for (double f : grid) {
      if (kind == TransformKind::kIdentity && f != 1.0)
        throw std::invalid_argument("identity cells take factor 1");
      Transform{kind, f, 0}.validate();
    }
  }
}

std::vector<SweepRow> run_sweep(const WatermarkModel& model, std::span<const Image> images,
                                const Message& msg, const SweepSpec& spec) {
  spec.validate();
  if (images.empty()) throw std::invalid_argument("run_sweep: no images");
  std::vector<Image> marked(images.size());
  detail::parallel_for(images.size(), [&](std::size_t i) { marked[i] = model.encode(images[i], msg); });

  const auto reps = static_cast<std::size_t>(spec.repetitions);
  std::vector<SweepRow> rows;
  std::size_t cell = 0;
  for (const auto& [kind, grid] : spec.grids) {
    for (double factor : grid) {
      SweepRow row;
      row.kind = kind;
      row.factor = factor;
      const std::uint64_t cell_seed = derive_seed(spec.seed, cell++);
      const std::size_t trials = marked.size() * reps;
      std::vector<double> acc(trials);
      try {
        detail::parallel_for(trials, [&](std::size_t k) {
          const Transform t{kind, factor, derive_seed(cell_seed, k)};
          acc[k] = bit_accuracy(msg, model.extract(apply_transform(marked[k / reps], t)));
        });
        double sum = 0.0;
        for (double a : acc) sum += a;
        row.mean_bit_acc = sum / static_cast<double>(trials);
        double ss = 0.0;
        for (double a : acc) ss += (a - row.mean_bit_acc) * (a - row.mean_bit_acc);
        row.std = std::sqrt(ss / static_cast<double>(trials));
        row.n = trials;
      } catch (const std::exception& e) {
        row.mean_bit_acc = std::numeric_limits<double>::quiet_NaN();
        row.std = std::numeric_limits<double>::quiet_NaN();
        row.n = 0;
        row.error = e.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const SweepRow& r : rows)
    out += std::string(kind_name(r.kind)) + ',' + format_number(r.factor) + ',' + format_number(r.mean_bit_acc) +
           ',' + format_number(r.std) + ',' + std::to_string(r.n) + '\n';
  return out;
}

}  // namespace wmark
