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
#include "wmark/augment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmark/watermarknet.hpp"

namespace wmark {

namespace {

// Contribution of each channel to the luma mean, as luma_mean() weighs them.
std::vector<double> luma_weights(std::size_t channels) {
  if (channels >= 3) {
    std::vector<double> w(channels, 0.0);
    w[0] = 0.299;
    w[1] = 0.587;
    w[2] = 0.114;
    return w;
  }
  return std::vector<double>(channels, 1.0);
}

}  // namespace

tg::Var transform_batch(const tg::Var& x, TransformKind kind, double factor,
                        std::span<const std::uint64_t> seeds) {
  const Tensor& in = x->value;
  if (in.rank() != 4) throw ShapeError("transform_batch: expected N x C x H x W, got " + shape_str(in.shape()));
  const std::size_t n = in.dim(0), c = in.dim(1), h = in.dim(2), w = in.dim(3);
  if (seeds.size() != n)
    throw std::invalid_argument("transform_batch: " + std::to_string(seeds.size()) + " seeds for " +
                                std::to_string(n) + " images");
  Transform base{kind, factor, 0};
  base.validate();

  std::vector<Image> outs;
  outs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Transform t = base;
    t.seed = seeds[i];
    outs.push_back(apply_transform(tensor_to_image(in, i), t));
  }
  Tensor value = images_to_tensor(outs);
  const std::size_t oh = value.dim(2), ow = value.dim(3);
  const std::size_t in_img = c * h * w, out_img = c * oh * ow;

  tg::BackwardFn fn;
  switch (kind) {
    case TransformKind::kIdentity:
    case TransformKind::kJpeg:
      fn = [](tg::Node& self) {
        const Tensor& g = *self.grad;
        double* dx = self.parents[0]->grad_buffer().ptr();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      };
      break;
    case TransformKind::kCrop: {
      std::vector<CropWindow> wins;
      for (std::size_t i = 0; i < n; ++i) wins.push_back(crop_window(h, w, factor, seeds[i]));
      fn = [wins, c, h, w, oh, ow, in_img, out_img](tg::Node& self) {
        const Tensor& g = *self.grad;
        double* dx = self.parents[0]->grad_buffer().ptr();
        for (std::size_t i = 0; i < wins.size(); ++i)
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t y = 0; y < oh; ++y) {
              const double* src = g.ptr() + i * out_img + (ch * oh + y) * ow;
              double* dst = dx + i * in_img + (ch * h + wins[i].y0 + y) * w + wins[i].x0;
              for (std::size_t xx = 0; xx < ow; ++xx) dst[xx] += src[xx];
            }
      };
      break;
    }
    case TransformKind::kResize: {
      BilinearAxis ay = bilinear_axis(h, oh), ax = bilinear_axis(w, ow);
      const bool same = oh == h && ow == w;
      fn = [ay, ax, same, n, c, h, w, oh, ow, in_img, out_img](tg::Node& self) {
        const Tensor& g = *self.grad;
        double* dx = self.parents[0]->grad_buffer().ptr();
        if (same) {
          for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
          return;
        }
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const double* src = g.ptr() + i * out_img + ch * oh * ow;
            double* dst = dx + i * in_img + ch * h * w;
            for (std::size_t y = 0; y < oh; ++y) {
              const double wy = ay.w[y];
              for (std::size_t xx = 0; xx < ow; ++xx) {
                const double gv = src[y * ow + xx];
                const double wx = ax.w[xx];
                dst[ay.lo[y] * w + ax.lo[xx]] += gv * (1.0 - wy) * (1.0 - wx);
                dst[ay.lo[y] * w + ax.hi[xx]] += gv * (1.0 - wy) * wx;
                dst[ay.hi[y] * w + ax.lo[xx]] += gv * wy * (1.0 - wx);
                dst[ay.hi[y] * w + ax.hi[xx]] += gv * wy * wx;
              }
            }
          }
      };
      break;
    }
    case TransformKind::kBrightness: {
      std::vector<double> slope(in.size());
      for (std::size_t i = 0; i < in.size(); ++i) {
        const double raw = factor * in[i];
        slope[i] = (raw >= 0.0 && raw <= 1.0) ? factor : 0.0;
      }
      fn = [slope = std::move(slope)](tg::Node& self) {
        const Tensor& g = *self.grad;
        double* dx = self.parents[0]->grad_buffer().ptr();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += slope[i] * g[i];
      };
      break;
    }
    case TransformKind::kContrast: {
      if (factor == 1.0) {
        fn = [](tg::Node& self) {
          const Tensor& g = *self.grad;
          double* dx = self.parents[0]->grad_buffer().ptr();
          for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
        };
        break;
      }
      std::vector<std::uint8_t> open(in.size());
      for (std::size_t i = 0; i < n; ++i) {
        const double mu = luma_mean(tensor_to_image(in, i));
        for (std::size_t j = 0; j < in_img; ++j) {
          const double raw = mu + factor * (in[i * in_img + j] - mu);
          open[i * in_img + j] = raw >= 0.0 && raw <= 1.0;
        }
      }
      const std::vector<double> lw = luma_weights(c);
      const std::size_t plane = h * w;
      fn = [open = std::move(open), lw, factor, n, c, plane, in_img](tg::Node& self) {
        const Tensor& g = *self.grad;
        double* dx = self.parents[0]->grad_buffer().ptr();
        for (std::size_t i = 0; i < n; ++i) {
          double passed = 0.0;
          for (std::size_t j = 0; j < in_img; ++j)
            if (open[i * in_img + j]) passed += g[i * in_img + j];
          const double share = (1.0 - factor) * passed / static_cast<double>(plane);
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < plane; ++p) {
              const std::size_t j = i * in_img + ch * plane + p;
              dx[j] += (open[j] ? factor * g[j] : 0.0) + lw[ch] * share;
            }
        }
      };
      break;
    }
  }
  return tg::make_op("transform_" + std::string(kind_name(kind)), std::move(value), {x}, std::move(fn));
}

}  // namespace wmark
