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
#include "wmark/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wmark/rng.hpp"

namespace wmark {

std::string_view kind_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::kIdentity: return "identity";
    case TransformKind::kCrop: return "crop";
    case TransformKind::kResize: return "resize";
    case TransformKind::kBrightness: return "brightness";
    case TransformKind::kContrast: return "contrast";
    case TransformKind::kJpeg: return "jpeg";
  }
  return "unknown";
}

TransformKind parse_kind(std::string_view name) {
  for (TransformKind k : {TransformKind::kIdentity, TransformKind::kCrop, TransformKind::kResize,
                          TransformKind::kBrightness, TransformKind::kContrast, TransformKind::kJpeg})
    if (kind_name(k) == name) return k;
  throw std::invalid_argument("unknown transform kind '" + std::string(name) + "'");
}

void Transform::validate() const {
  const std::string k(kind_name(kind));
  switch (kind) {
    case TransformKind::kIdentity:
      return;
    case TransformKind::kCrop:
    case TransformKind::kResize:
      if (!(factor > 0.0 && factor <= 1.0))
        throw std::invalid_argument(k + " ratio " + std::to_string(factor) + " outside (0,1]");
      return;
    case TransformKind::kBrightness:
    case TransformKind::kContrast:
      if (!(factor > 0.0) || !std::isfinite(factor))
        throw std::invalid_argument(k + " factor " + std::to_string(factor) + " must be > 0");
      return;
    case TransformKind::kJpeg:
      if (!(factor >= 1.0 && factor <= 100.0) || factor != std::floor(factor))
        throw std::invalid_argument("jpeg quality " + std::to_string(factor) +
                                    " must be an integer in [1,100]");
      return;
  }
}

std::size_t scaled_extent(std::size_t extent, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::invalid_argument("ratio " + std::to_string(ratio) + " outside (0,1]");
  // The epsilon keeps products such as 0.7 * 10 from flooring to 6.
  const auto out = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(extent) + 1e-9));
  if (out < 1)
    throw std::invalid_argument("ratio " + std::to_string(ratio) + " of extent " +
                                std::to_string(extent) + " leaves no pixels");
  return out;
}

CropWindow crop_window(std::size_t height, std::size_t width, double ratio, std::uint64_t seed) {
  CropWindow win;
  win.height = scaled_extent(height, ratio);
  win.width = scaled_extent(width, ratio);
  Rng rng(seed);
  win.y0 = static_cast<std::size_t>(rng.below(height - win.height + 1));
  win.x0 = static_cast<std::size_t>(rng.below(width - win.width + 1));
  return win;
}

Image crop(const Image& img, const CropWindow& win) {
  if (win.height == 0 || win.width == 0 || win.y0 + win.height > img.height() ||
      win.x0 + win.width > img.width())
    throw std::invalid_argument("crop window outside image " + img.shape_string());
  Image out(img.channels(), win.height, win.width);
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < win.height; ++y)
      for (std::size_t x = 0; x < win.width; ++x) out.at(c, y, x) = img.at(c, win.y0 + y, win.x0 + x);
  return out;
}

Image crop_random(const Image& img, double ratio, std::uint64_t seed) {
  return crop(img, crop_window(img.height(), img.width(), ratio, seed));
}

BilinearAxis bilinear_axis(std::size_t in, std::size_t out) {
  if (in == 0 || out == 0) throw std::invalid_argument("bilinear_axis: zero extent");
  BilinearAxis ax;
  ax.lo.resize(out);
  ax.hi.resize(out);
  ax.w.resize(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t i = 0; i < out; ++i) {
    const double src = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    ax.lo[i] = lo;
    ax.hi[i] = std::min(lo + 1, in - 1);
    ax.w[i] = src - static_cast<double>(lo);
  }
  return ax;
}

Image resize_to(const Image& img, std::size_t height, std::size_t width) {
  const BilinearAxis ay = bilinear_axis(img.height(), height);
  const BilinearAxis axx = bilinear_axis(img.width(), width);
  Image out(img.channels(), height, width);
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double top = (1.0 - axx.w[x]) * img.at(c, ay.lo[y], axx.lo[x]) +
                           axx.w[x] * img.at(c, ay.lo[y], axx.hi[x]);
        const double bot = (1.0 - axx.w[x]) * img.at(c, ay.hi[y], axx.lo[x]) +
                           axx.w[x] * img.at(c, ay.hi[y], axx.hi[x]);
        out.at(c, y, x) = (1.0 - ay.w[y]) * top + ay.w[y] * bot;
      }
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, double ratio) {
  const std::size_t h = scaled_extent(img.height(), ratio);
  const std::size_t w = scaled_extent(img.width(), ratio);
  if (h == img.height() && w == img.width()) return img;
  return resize_to(img, h, w);
}

Image adjust_brightness(const Image& img, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("brightness factor must be > 0");
  Image out = img;
  for (double& v : out.pixels()) v = std::clamp(factor * v, 0.0, 1.0);
  return out;
}

double luma_mean(const Image& img) {
  const std::size_t n = img.plane_size();
  double acc = 0.0;
  if (img.channels() >= 3) {
    for (std::size_t i = 0; i < n; ++i)
      acc += 0.299 * img.pixels()[i] + 0.587 * img.pixels()[n + i] + 0.114 * img.pixels()[2 * n + i];
  } else {
    for (std::size_t i = 0; i < n; ++i) acc += img.pixels()[i];
  }
  return acc / static_cast<double>(n);
}

Image adjust_contrast(const Image& img, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("contrast factor must be > 0");
  if (factor == 1.0) return img;
  const double mu = luma_mean(img);
  Image out = img;
  for (double& v : out.pixels()) v = std::clamp(mu + factor * (v - mu), 0.0, 1.0);
  return out;
}

namespace jpeg {
namespace {

struct DctBasis {
  std::array<double, 64> m{};  // m[u*8 + x] = alpha(u) cos((2x+1) u pi / 16)
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x)
        m[u * 8 + x] = alpha * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0);
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

}  // namespace

const QuantTable& base_luma_table() {
  static const QuantTable t = {
      16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
      14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
      18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
      49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
  return t;
}

const QuantTable& base_chroma_table() {
  static const QuantTable t = {
      17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
      24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};
  return t;
}

int quality_scale(int quality) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg quality " + std::to_string(quality) + " outside [1,100]");
  return quality < 50 ? 5000 / quality : 200 - 2 * quality;
}

QuantTable scaled_table(const QuantTable& base, int quality) {
  const int scale = quality_scale(quality);
  QuantTable out{};
  for (std::size_t i = 0; i < 64; ++i) out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return out;
}

Block forward_dct(const Block& f) {
  const auto& m = basis().m;
  Block tmp{}, out{};
  // tmp = M f
  for (int u = 0; u < 8; ++u)
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += m[u * 8 + x] * f[x * 8 + y];
      tmp[u * 8 + y] = acc;
    }
  // out = tmp M^T
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += tmp[u * 8 + y] * m[v * 8 + y];
      out[u * 8 + v] = acc;
    }
  return out;
}

Block inverse_dct(const Block& c) {
  const auto& m = basis().m;
  Block tmp{}, out{};
  // tmp = M^T c
  for (int x = 0; x < 8; ++x)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += m[u * 8 + x] * c[u * 8 + v];
      tmp[x * 8 + v] = acc;
    }
  // out = tmp M
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += tmp[x * 8 + v] * m[v * 8 + y];
      out[x * 8 + y] = acc;
    }
  return out;
}

}  // namespace jpeg

namespace {

// Quantise/dequantise one plane (0-255 scale, already level-shifted by the
// caller's convention) in place. The plane is padded by edge replication.
void quantise_plane(std::vector<double>& plane, std::size_t h, std::size_t w,
                    const jpeg::QuantTable& q) {
  const std::size_t ph = (h + 7) / 8 * 8, pw = (w + 7) / 8 * 8;
  for (std::size_t by = 0; by < ph; by += 8) {
    for (std::size_t bx = 0; bx < pw; bx += 8) {
      jpeg::Block blk{};
      for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) {
          const std::size_t sy = std::min(by + y, h - 1), sx = std::min(bx + x, w - 1);
          blk[y * 8 + x] = plane[sy * w + sx] - 128.0;
        }
      jpeg::Block coef = jpeg::forward_dct(blk);
      for (std::size_t i = 0; i < 64; ++i) coef[i] = std::round(coef[i] / q[i]) * q[i];
      const jpeg::Block rec = jpeg::inverse_dct(coef);
      for (std::size_t y = 0; y < 8 && by + y < h; ++y)
        for (std::size_t x = 0; x < 8 && bx + x < w; ++x)
          plane[(by + y) * w + bx + x] = rec[y * 8 + x] + 128.0;
    }
  }
}

}  // namespace

Image jpeg_roundtrip(const Image& img, int quality) {
  const jpeg::QuantTable ql = jpeg::scaled_table(jpeg::base_luma_table(), quality);
  if (img.height() < 8 || img.width() < 8)
    throw std::invalid_argument("jpeg_roundtrip needs H,W >= 8, image is " + img.shape_string());
  if (img.channels() != 1 && img.channels() != 3)
    throw std::invalid_argument("jpeg_roundtrip supports 1 or 3 channels");
  const std::size_t h = img.height(), w = img.width(), n = h * w;
  const auto& px = img.pixels();
  Image out(img.channels(), h, w);
  if (img.channels() == 1) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 255.0 * px[i];
    quantise_plane(y, h, w, ql);
    for (std::size_t i = 0; i < n; ++i) out.pixels()[i] = std::clamp(y[i] / 255.0, 0.0, 1.0);
    return out;
  }
  const jpeg::QuantTable qc = jpeg::scaled_table(jpeg::base_chroma_table(), quality);
  std::vector<double> yp(n), cb(n), cr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 255.0 * px[i], g = 255.0 * px[n + i], b = 255.0 * px[2 * n + i];
    yp[i] = 0.299 * r + 0.587 * g + 0.114 * b;
    cb[i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
    cr[i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
  }
  quantise_plane(yp, h, w, ql);
  quantise_plane(cb, h, w, qc);
  quantise_plane(cr, h, w, qc);
  auto& o = out.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const double y = yp[i], u = cb[i] - 128.0, v = cr[i] - 128.0;
    o[i] = std::clamp((y + 1.402 * v) / 255.0, 0.0, 1.0);
    o[n + i] = std::clamp((y - 0.344136 * u - 0.714136 * v) / 255.0, 0.0, 1.0);
    o[2 * n + i] = std::clamp((y + 1.772 * u) / 255.0, 0.0, 1.0);
  }
  return out;
}

Image apply_transform(const Image& img, const Transform& t) {
  t.validate();
  switch (t.kind) {
    case TransformKind::kIdentity: return img;
    case TransformKind::kCrop: return crop_random(img, t.factor, t.seed);
    case TransformKind::kResize: return resize_bilinear(img, t.factor);
    case TransformKind::kBrightness: return adjust_brightness(img, t.factor);
    case TransformKind::kContrast: return adjust_contrast(img, t.factor);
    case TransformKind::kJpeg: return jpeg_roundtrip(img, static_cast<int>(t.factor));
  }
  return img;
}

}  // namespace wmark
