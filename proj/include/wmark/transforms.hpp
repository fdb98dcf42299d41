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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wmark/image.hpp"

namespace wmark {

enum class TransformKind { kIdentity, kCrop, kResize, kBrightness, kContrast, kJpeg };

std::string_view kind_name(TransformKind kind);
// Accepts the names printed by kind_name; throws std::invalid_argument otherwise.
TransformKind parse_kind(std::string_view name);

struct Transform {
  TransformKind kind = TransformKind::kIdentity;
  double factor = 1.0;     // ratio, gain, or JPEG quality
  std::uint64_t seed = 0;  // crop offset only

  // crop/resize: factor in (0,1]; brightness/contrast: > 0; jpeg: integer in [1,100].
  void validate() const;
};

// floor(ratio * extent) with the ratio checked to lie in (0,1].
std::size_t scaled_extent(std::size_t extent, double ratio);

struct CropWindow {
  std::size_t y0 = 0, x0 = 0, height = 0, width = 0;
};
// Output size (floor(ratio*H), floor(ratio*W)); offset uniform over valid positions.
CropWindow crop_window(std::size_t height, std::size_t width, double ratio, std::uint64_t seed);
Image crop(const Image& img, const CropWindow& win);
Image crop_random(const Image& img, double ratio, std::uint64_t seed);

// Source taps for one axis of a half-pixel-centre bilinear resample with
// clamp-to-edge: out[i] = (1-w[i]) * in[lo[i]] + w[i] * in[hi[i]].
struct BilinearAxis {
  std::vector<std::size_t> lo, hi;
  std::vector<double> w;
};
BilinearAxis bilinear_axis(std::size_t in, std::size_t out);
Image resize_to(const Image& img, std::size_t height, std::size_t width);
Image resize_bilinear(const Image& img, double ratio);

// clamp(factor * p, 0, 1)
Image adjust_brightness(const Image& img, double factor);
// Mean of 0.299 R + 0.587 G + 0.114 B over the image (plain mean for 1 channel).
double luma_mean(const Image& img);
// clamp(mu + factor * (p - mu), 0, 1) with mu = luma_mean(img).
Image adjust_contrast(const Image& img, double factor);

// Baseline-JPEG fidelity round trip without entropy coding or subsampling.
Image jpeg_roundtrip(const Image& img, int quality);

Image apply_transform(const Image& img, const Transform& t);

namespace jpeg {

using Block = std::array<double, 64>;
using QuantTable = std::array<int, 64>;

// Annex K base tables, row-major (natural order).
const QuantTable& base_luma_table();
const QuantTable& base_chroma_table();
// 5000/q (integer division) below 50, else 200 - 2q.
int quality_scale(int quality);
// clamp(floor((base * scale + 50) / 100), 1, 255) per entry.
QuantTable scaled_table(const QuantTable& base, int quality);

// Orthonormal 8x8 DCT-II and its inverse.
Block forward_dct(const Block& spatial);
Block inverse_dct(const Block& coeffs);

}  // namespace jpeg

}  // namespace wmark
