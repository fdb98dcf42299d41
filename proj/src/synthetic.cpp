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
#include "wmark/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wmark/rng.hpp"

namespace wmark::synth {
namespace {

void rescale(Image& img, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double a = *mn, b = *mx;
  const double span = b - a > 1e-12 ? b - a : 1.0;
  for (double& v : img.pixels()) v = lo + (hi - lo) * (v - a) / span;
}

}  // namespace

Image texture(std::uint64_t seed, std::size_t channels, std::size_t height, std::size_t width) {
  Rng rng(seed);
  Image img(channels, height, width);
  const int gratings = 3 + static_cast<int>(rng.below(3));
  const int blobs = 2 + static_cast<int>(rng.below(4));
  struct Wave {
    double fx, fy, phase, amp;
    std::vector<double> mix;
  };
  std::vector<Wave> waves;
  for (int g = 0; g < gratings; ++g) {
    const double freq = rng.uniform(0.5, 4.0);
    const double angle = rng.uniform(0.0, std::numbers::pi);
    Wave w{freq * std::cos(angle), freq * std::sin(angle), rng.uniform(0.0, 2 * std::numbers::pi),
           rng.uniform(0.3, 1.0), {}};
    for (std::size_t c = 0; c < channels; ++c) w.mix.push_back(rng.uniform(0.2, 1.0));
    waves.push_back(std::move(w));
  }
  struct Blob {
    double cy, cx, r, amp;
    std::vector<double> mix;
  };
  std::vector<Blob> bl;
  for (int b = 0; b < blobs; ++b) {
    Blob bb{rng.uniform(), rng.uniform(), rng.uniform(0.08, 0.35), rng.uniform(-1.0, 1.0), {}};
    for (std::size_t c = 0; c < channels; ++c) bb.mix.push_back(rng.uniform(0.3, 1.0));
    bl.push_back(std::move(bb));
  }
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(width);
        const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(height);
        double s = 0.0;
        for (const Wave& w : waves)
          s += w.amp * w.mix[c] * std::sin(2 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
        for (const Blob& b : bl) {
          const double d2 = (u - b.cx) * (u - b.cx) + (v - b.cy) * (v - b.cy);
          s += 1.5 * b.amp * b.mix[c] * std::exp(-d2 / (2 * b.r * b.r));
        }
        img.at(c, y, x) = s;
      }
  rescale(img, 0.05, 0.95);
  return img;
}

std::vector<Image> textures(std::uint64_t seed, std::size_t count, std::size_t channels,
                            std::size_t height, std::size_t width) {
  std::vector<Image> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(texture(derive_seed(seed, i), channels, height, width));
  return out;
}

IdentitySet identities(std::uint64_t seed, std::size_t identity_count,
                       std::size_t images_per_identity, std::size_t channels, std::size_t height,
                       std::size_t width) {
  IdentitySet set;
  for (std::size_t id = 0; id < identity_count; ++id) {
    Rng idr(derive_seed(seed, id));
    struct Blob {
      double cy, cx, ry, rx, amp;
    };
    std::vector<Blob> parts;
    // Head ellipse plus identity-specific features.
    parts.push_back({0.5, 0.5, idr.uniform(0.30, 0.42), idr.uniform(0.25, 0.36), 0.6});
    const int features = 5 + static_cast<int>(idr.below(3));
    for (int f = 0; f < features; ++f)
      parts.push_back({idr.uniform(0.2, 0.8), idr.uniform(0.2, 0.8), idr.uniform(0.04, 0.12),
                       idr.uniform(0.04, 0.12), idr.uniform(-0.5, 0.5)});
    std::vector<double> tint(channels);
    for (double& t : tint) t = idr.uniform(0.6, 1.0);
    const double bg = idr.uniform(0.1, 0.4);

    for (std::size_t k = 0; k < images_per_identity; ++k) {
      Rng r(derive_seed(seed ^ 0xA5A5A5A5ULL, id * 1000003ULL + k));
      const double dy = r.uniform(-0.04, 0.04), dx = r.uniform(-0.04, 0.04);
      const double gain = r.uniform(0.9, 1.1);
      Image img(channels, height, width);
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(height) - dy;
          const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(width) - dx;
          double s = bg;
          for (const Blob& b : parts) {
            const double q = (v - b.cy) * (v - b.cy) / (b.ry * b.ry) +
                             (u - b.cx) * (u - b.cx) / (b.rx * b.rx);
            s += b.amp * std::exp(-0.5 * q * q);
          }
          for (std::size_t c = 0; c < channels; ++c)
            img.at(c, y, x) = std::clamp(gain * tint[c] * s + 0.03 * r.normal(), 0.0, 1.0);
        }
      set.images.push_back(std::move(img));
      set.labels.push_back(id);
    }
  }
  return set;
}

}  // namespace wmark::synth
