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
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "wmark/autograd.hpp"
#include "wmark/kernels.hpp"

namespace wmark::tg {
namespace {

std::string ax(std::size_t i) { return std::to_string(i); }

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* arg) {
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + ax(rank) + ", got " +
                     shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rank() != b.rank())
    throw ShapeError(std::string(op) + ": rank mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (a.dim(i) != b.dim(i))
      throw ShapeError(std::string(op) + ": axis " + ax(i) + " differs (" + ax(a.dim(i)) +
                       " vs " + ax(b.dim(i)) + ")");
}

struct ConvGeom {
  std::size_t n, cin, h, w, cout, k, stride, pad, ho, wo;
  std::size_t patch() const { return cin * k * k; }
  std::size_t pixels() const { return ho * wo; }
};

// Output columns [lo, hi) whose input column ox*s - pad + kj is in range.
std::pair<std::size_t, std::size_t> valid_cols(const ConvGeom& g, std::size_t kj) {
  std::size_t lo = 0;
  while (lo < g.wo && lo * g.stride + kj < g.pad) ++lo;
  std::size_t hi = lo;
  while (hi < g.wo && hi * g.stride + kj < g.pad + g.w) ++hi;
  return {lo, hi};
}

// cols[(c*k + ki)*k + kj][oy*wo + ox] = x[c][oy*s - pad + ki][ox*s - pad + kj]
void im2col(const ConvGeom& g, const double* x, double* cols) {
  const std::size_t p = g.pixels();
  for (std::size_t c = 0; c < g.cin; ++c) {
    const double* xc = x + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        double* row = cols + ((c * g.k + ki) * g.k + kj) * p;
        const auto [lo, hi] = valid_cols(g, kj);
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          double* out = row + oy * g.wo;
          const std::size_t iy = oy * g.stride + ki;
          if (iy < g.pad || iy >= g.pad + g.h || lo >= hi) {
            std::fill(out, out + g.wo, 0.0);
            continue;
          }
          const double* xr = xc + (iy - g.pad) * g.w;
          std::fill(out, out + lo, 0.0);
          if (g.stride == 1) {
            std::copy(xr + lo + kj - g.pad, xr + hi + kj - g.pad, out + lo);
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) out[ox] = xr[ox * g.stride + kj - g.pad];
          }
          std::fill(out + hi, out + g.wo, 0.0);
        }
      }
    }
  }
}

void col2im_add(const ConvGeom& g, const double* cols, double* dx) {
  const std::size_t p = g.pixels();
  for (std::size_t c = 0; c < g.cin; ++c) {
    double* xc = dx + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const double* row = cols + ((c * g.k + ki) * g.k + kj) * p;
        const auto [lo, hi] = valid_cols(g, kj);
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const std::size_t iy = oy * g.stride + ki;
          if (iy < g.pad || iy >= g.pad + g.h) continue;
          double* xr = xc + (iy - g.pad) * g.w;
          const double* in = row + oy * g.wo;
          for (std::size_t ox = lo; ox < hi; ++ox) xr[ox * g.stride + kj - g.pad] += in[ox];
        }
      }
    }
  }
}

ConvGeom conv_geometry(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                       std::size_t pad) {
  require_rank(x, 4, "conv2d", "input");
  require_rank(w, 4, "conv2d", "weight");
  require_rank(b, 1, "conv2d", "bias");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  ConvGeom g{};
  g.n = x.dim(0);
  g.cin = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.cout = w.dim(0);
  g.k = w.dim(2);
  g.stride = stride;
  g.pad = pad;
  if (w.dim(1) != g.cin)
    throw ShapeError("conv2d: weight axis 1 (input channels) is " + ax(w.dim(1)) +
                     " but input axis 1 is " + ax(g.cin));
  if (w.dim(3) != g.k)
    throw ShapeError("conv2d: kernel axis 3 (" + ax(w.dim(3)) + ") differs from axis 2 (" +
                     ax(g.k) + ")");
  if (g.k % 2 == 0) throw ShapeError("conv2d: kernel size " + ax(g.k) + " on axis 2 is not odd");
  if (b.dim(0) != g.cout)
    throw ShapeError("conv2d: bias axis 0 is " + ax(b.dim(0)) + " but weight axis 0 is " +
                     ax(g.cout));
  auto out_extent = [&](std::size_t in, std::size_t axis) {
    if (in + 2 * pad < g.k)
      throw ShapeError("conv2d: input axis " + ax(axis) + " (" + ax(in) +
                       ") smaller than kernel after padding");
    const std::size_t span = in + 2 * pad - g.k;
    if (span % stride != 0)
      throw ShapeError("conv2d: input axis " + ax(axis) + " (" + ax(in) +
                       ") gives a non-integral output size for stride " + ax(stride));
    return span / stride + 1;
  };
  g.ho = out_extent(g.h, 2);
  g.wo = out_extent(g.w, 3);
  return g;
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, std::size_t stride, std::size_t pad) {
  const ConvGeom g = conv_geometry(x->value, w->value, b->value, stride, pad);
  const auto& kt = kernels::active();
  Tensor out({g.n, g.cout, g.ho, g.wo});
  std::vector<double> cols(g.patch() * g.pixels());
  const std::size_t in_stride = g.cin * g.h * g.w;
  const std::size_t out_stride = g.cout * g.pixels();
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(g, x->value.ptr() + n * in_stride, cols.data());
    double* o = out.ptr() + n * out_stride;
    for (std::size_t co = 0; co < g.cout; ++co)
      std::fill(o + co * g.pixels(), o + (co + 1) * g.pixels(), b->value[co]);
    kt.gemm_nn(g.cout, g.pixels(), g.patch(), w->value.ptr(), g.patch(), cols.data(),
               g.pixels(), o, g.pixels());
  }
  return make_op("conv2d", std::move(out), {x, w, b}, [g, in_stride, out_stride](Node& self) {
    const auto& kt = kernels::active();
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    Node& bn = *self.parents[2];
    const Tensor& dy = *self.grad;
    std::vector<double> cols(g.patch() * g.pixels());
    std::vector<double> wt;
    if (xn.requires_grad) {
      // Transposed weight: patch x cout.
      wt.resize(g.patch() * g.cout);
      for (std::size_t co = 0; co < g.cout; ++co)
        for (std::size_t q = 0; q < g.patch(); ++q)
          wt[q * g.cout + co] = wn.value[co * g.patch() + q];
    }
    for (std::size_t n = 0; n < g.n; ++n) {
      const double* dyn = dy.ptr() + n * out_stride;
      if (wn.requires_grad) {
        im2col(g, xn.value.ptr() + n * in_stride, cols.data());
        kt.gemm_nt(g.cout, g.patch(), g.pixels(), dyn, g.pixels(), cols.data(), g.pixels(),
                   wn.grad_buffer().ptr(), g.patch());
      }
      if (bn.requires_grad) {
        double* db = bn.grad_buffer().ptr();
        for (std::size_t co = 0; co < g.cout; ++co) db[co] += kt.sum(dyn + co * g.pixels(), g.pixels());
      }
      if (xn.requires_grad) {
        std::fill(cols.begin(), cols.end(), 0.0);
        kt.gemm_nn(g.patch(), g.pixels(), g.cout, wt.data(), g.cout, dyn, g.pixels(),
                   cols.data(), g.pixels());
        col2im_add(g, cols.data(), xn.grad_buffer().ptr() + n * in_stride);
      }
    }
  });
}

void BatchNormState::reset(std::size_t channels) {
  running_mean.assign(channels, 0.0);
  running_var.assign(channels, 1.0);
}

namespace {

Var batchnorm_impl(const Var& x, const Var& gamma, const Var& beta, const BatchNormState& cstate,
                   BatchNormState* train_state, double eps) {
  const Mode mode = train_state ? Mode::kTrain : Mode::kInfer;
  const Tensor& xv = x->value;
  require_rank(xv, 4, "batchnorm2d", "input");
  require_rank(gamma->value, 1, "batchnorm2d", "gamma");
  require_rank(beta->value, 1, "batchnorm2d", "beta");
  if (!(eps > 0.0)) throw std::invalid_argument("batchnorm2d: eps must be positive");
  const std::size_t n = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  if (gamma->value.dim(0) != c || beta->value.dim(0) != c)
    throw ShapeError("batchnorm2d: gamma/beta axis 0 must equal input axis 1 (" + ax(c) + ")");
  const std::size_t count = n * hw;

  std::vector<double> mean(c), inv_std(c);
  if (train_state) {
    BatchNormState& state = *train_state;
    if (!state.populated()) state.reset(c);
    if (state.running_mean.size() != c)
      throw ShapeError("batchnorm2d: running stats hold " + ax(state.running_mean.size()) +
                       " channels, input axis 1 is " + ax(c));
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.ptr() + (i * c + ch) * hw;
        for (std::size_t j = 0; j < hw; ++j) s += p[j];
      }
      const double mu = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.ptr() + (i * c + ch) * hw;
        for (std::size_t j = 0; j < hw; ++j) ss += (p[j] - mu) * (p[j] - mu);
      }
      const double var = ss / static_cast<double>(count);
      mean[ch] = mu;
      inv_std[ch] = 1.0 / std::sqrt(var + eps);
      const double unbiased = count > 1 ? ss / static_cast<double>(count - 1) : var;
      state.running_mean[ch] = (1.0 - state.momentum) * state.running_mean[ch] + state.momentum * mu;
      state.running_var[ch] = (1.0 - state.momentum) * state.running_var[ch] + state.momentum * unbiased;
    }
  } else {
    const BatchNormState& state = cstate;
    if (!state.populated())
      throw std::logic_error("batchnorm2d: inference mode requires populated running statistics");
    if (state.running_mean.size() != c)
      throw ShapeError("batchnorm2d: running stats hold " + ax(state.running_mean.size()) +
                       " channels, input axis 1 is " + ax(c));
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = state.running_mean[ch];
      inv_std[ch] = 1.0 / std::sqrt(state.running_var[ch] + eps);
    }
  }

  Tensor xhat(xv.shape());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (i * c + ch) * hw;
      const double g = gamma->value[ch], bt = beta->value[ch];
      for (std::size_t j = 0; j < hw; ++j) {
        const double h = (xv[off + j] - mean[ch]) * inv_std[ch];
        xhat[off + j] = h;
        out[off + j] = g * h + bt;
      }
    }
  }
  return make_op("batchnorm2d", std::move(out), {x, gamma, beta},
                 [xhat = std::move(xhat), inv_std, n, c, hw, count, mode](Node& self) {
    Node& xn = *self.parents[0];
    Node& gn = *self.parents[1];
    Node& bn = *self.parents[2];
    const Tensor& dy = *self.grad;
    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t off = (i * c + ch) * hw;
        for (std::size_t j = 0; j < hw; ++j) {
          sum_dy[ch] += dy[off + j];
          sum_dy_xhat[ch] += dy[off + j] * xhat[off + j];
        }
      }
    }
    if (gn.requires_grad) {
      Tensor& dg = gn.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) dg[ch] += sum_dy_xhat[ch];
    }
    if (bn.requires_grad) {
      Tensor& db = bn.grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch) db[ch] += sum_dy[ch];
    }
    if (!xn.requires_grad) return;
    Tensor& dx = xn.grad_buffer();
    const double inv_count = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t off = (i * c + ch) * hw;
        const double g = gn.value[ch] * inv_std[ch];
        if (mode == Mode::kTrain) {
          const double m1 = sum_dy[ch] * inv_count, m2 = sum_dy_xhat[ch] * inv_count;
          for (std::size_t j = 0; j < hw; ++j)
            dx[off + j] += g * (dy[off + j] - m1 - xhat[off + j] * m2);
        } else {
          for (std::size_t j = 0; j < hw; ++j) dx[off + j] += g * dy[off + j];
        }
      }
    }
  });
}

}  // namespace

Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state,
                Mode mode, double eps) {
  return batchnorm_impl(x, gamma, beta, state, mode == Mode::kTrain ? &state : nullptr, eps);
}

Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta, const BatchNormState& state,
                double eps) {
  return batchnorm_impl(x, gamma, beta, state, nullptr, eps);
}

Var relu(const Var& x) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] > 0.0 ? x->value[i] : 0.0;
  return make_op("relu", std::move(out), {x}, [](Node& self) {
    Node& xn = *self.parents[0];
    Tensor& dx = xn.grad_buffer();
    const Tensor& dy = *self.grad;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (xn.value[i] > 0.0) dx[i] += dy[i];
  });
}

Var sigmoid(const Var& x) {
  Tensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x->value[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return make_op("sigmoid", std::move(out), {x}, [](Node& self) {
    Tensor& dx = self.parents[0]->grad_buffer();
    const Tensor& dy = *self.grad;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double y = self.value[i];
      dx[i] += dy[i] * y * (1.0 - y);
    }
  });
}

Var affine(const Var& x, const Var& w, const Var& b) {
  require_rank(x->value, 2, "affine", "input");
  require_rank(w->value, 2, "affine", "weight");
  require_rank(b->value, 1, "affine", "bias");
  const std::size_t n = x->value.dim(0), f = x->value.dim(1), g = w->value.dim(0);
  if (w->value.dim(1) != f)
    throw ShapeError("affine: weight axis 1 is " + ax(w->value.dim(1)) + " but input axis 1 is " +
                     ax(f));
  if (b->value.dim(0) != g)
    throw ShapeError("affine: bias axis 0 is " + ax(b->value.dim(0)) + " but weight axis 0 is " +
                     ax(g));
  Tensor out({n, g});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g; ++j) out[i * g + j] = b->value[j];
  kernels::active().gemm_nt(n, g, f, x->value.ptr(), f, w->value.ptr(), f, out.ptr(), g);
  return make_op("affine", std::move(out), {x, w, b}, [n, f, g](Node& self) {
    const auto& kt = kernels::active();
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    Node& bn = *self.parents[2];
    const Tensor& dy = *self.grad;
    if (xn.requires_grad)
      kt.gemm_nn(n, f, g, dy.ptr(), g, wn.value.ptr(), f, xn.grad_buffer().ptr(), f);
    if (wn.requires_grad) {
      std::vector<double> dyt(g * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < g; ++j) dyt[j * n + i] = dy[i * g + j];
      kt.gemm_nn(g, f, n, dyt.data(), n, xn.value.ptr(), f, wn.grad_buffer().ptr(), f);
    }
    if (bn.requires_grad) {
      Tensor& db = bn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < g; ++j) db[j] += dy[i * g + j];
    }
  });
}

Var global_avg_pool(const Var& x) {
  require_rank(x->value, 4, "global_avg_pool", "input");
  const std::size_t n = x->value.dim(0), c = x->value.dim(1);
  const std::size_t hw = x->value.dim(2) * x->value.dim(3);
  Tensor out({n, c});
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < n * c; ++i)
    out[i] = kt.sum(x->value.ptr() + i * hw, hw) / static_cast<double>(hw);
  return make_op("global_avg_pool", std::move(out), {x}, [n, c, hw](Node& self) {
    Tensor& dx = self.parents[0]->grad_buffer();
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t i = 0; i < n * c; ++i) {
      const double g = (*self.grad)[i] * inv;
      double* p = dx.ptr() + i * hw;
      for (std::size_t j = 0; j < hw; ++j) p[j] += g;
    }
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.rank() < 2 || av.rank() != bv.rank())
    throw ShapeError("concat_channels: ranks " + shape_str(av.shape()) + " and " +
                     shape_str(bv.shape()) + " are incompatible");
  for (std::size_t i = 0; i < av.rank(); ++i)
    if (i != 1 && av.dim(i) != bv.dim(i))
      throw ShapeError("concat_channels: axis " + ax(i) + " differs (" + ax(av.dim(i)) + " vs " +
                       ax(bv.dim(i)) + ")");
  const std::size_t n = av.dim(0);
  const std::size_t sa = av.size() / n, sb = bv.size() / n;
  Shape shape = av.shape();
  shape[1] += bv.dim(1);
  Tensor out(shape);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.ptr() + i * sa, sa, out.ptr() + i * (sa + sb));
    std::copy_n(bv.ptr() + i * sb, sb, out.ptr() + i * (sa + sb) + sa);
  }
  return make_op("concat_channels", std::move(out), {a, b}, [n, sa, sb](Node& self) {
    const Tensor& dy = *self.grad;
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double* src = dy.ptr() + i * (sa + sb);
      if (an.requires_grad) {
        double* d = an.grad_buffer().ptr() + i * sa;
        for (std::size_t j = 0; j < sa; ++j) d[j] += src[j];
      }
      if (bn.requires_grad) {
        double* d = bn.grad_buffer().ptr() + i * sb;
        for (std::size_t j = 0; j < sb; ++j) d[j] += src[sa + j];
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "add");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_op("add", std::move(out), {a, b}, [](Node& self) {
    for (const Var& p : self.parents) {
      if (!p->requires_grad) continue;
      Tensor& d = p->grad_buffer();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += (*self.grad)[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (double& v : out.data()) v *= s;
  return make_op("scale", std::move(out), {a}, [s](Node& self) {
    Tensor& d = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * (*self.grad)[i];
  });
}

Var sum(const Var& x) {
  const double total = kernels::active().sum(x->value.ptr(), x->value.size());
  return make_op("sum", Tensor::scalar(total), {x}, [](Node& self) {
    Tensor& d = self.parents[0]->grad_buffer();
    const double g = (*self.grad)[0];
    for (double& v : d.data()) v += g;
  });
}

Var mse_loss(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "mse_loss");
  const std::size_t n = a->value.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a->value[i] - b->value[i];
    acc += d * d;
  }
  return make_op("mse_loss", Tensor::scalar(acc / static_cast<double>(n)), {a, b},
                 [n](Node& self) {
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    const double g = 2.0 * (*self.grad)[0] / static_cast<double>(n);
    if (an.requires_grad) {
      Tensor& d = an.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) d[i] += g * (an.value[i] - bn.value[i]);
    }
    if (bn.requires_grad) {
      Tensor& d = bn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) d[i] -= g * (an.value[i] - bn.value[i]);
    }
  });
}

Var bce_logits_loss(const Var& logits, const Tensor& targets) {
  const Tensor& x = logits->value;
  if (x.size() != targets.size())
    throw ShapeError("bce_logits_loss: " + ax(x.size()) + " logits but " + ax(targets.size()) +
                     " targets");
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (targets[i] != 0.0 && targets[i] != 1.0)
      throw std::invalid_argument("bce_logits_loss: target " + std::to_string(targets[i]) +
                                  " at index " + ax(i) + " is not 0 or 1");
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    acc += std::max(v, 0.0) - v * targets[i] + std::log1p(std::exp(-std::abs(v)));
  }
  return make_op("bce_logits_loss", Tensor::scalar(acc / static_cast<double>(n)), {logits},
                 [targets, n](Node& self) {
    Node& xn = *self.parents[0];
    Tensor& d = xn.grad_buffer();
    const double g = (*self.grad)[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = xn.value[i];
      const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      d[i] += g * (s - targets[i]);
    }
  });
}

Var softmax_cross_entropy(const Var& logits, const std::vector<std::size_t>& labels) {
  require_rank(logits->value, 2, "softmax_cross_entropy", "logits");
  const std::size_t n = logits->value.dim(0), k = logits->value.dim(1);
  if (labels.size() != n)
    throw ShapeError("softmax_cross_entropy: logits axis 0 is " + ax(n) + " but " +
                     ax(labels.size()) + " labels given");
  Tensor probs({n, k});
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= k)
      throw std::invalid_argument("softmax_cross_entropy: label " + ax(labels[i]) +
                                  " out of range for " + ax(k) + " classes");
    const double* row = logits->value.ptr() + i * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = std::exp(row[j] - mx) / z;
    acc += (mx + std::log(z)) - row[labels[i]];
  }
  return make_op("softmax_cross_entropy", Tensor::scalar(acc / static_cast<double>(n)), {logits},
                 [probs = std::move(probs), labels, n, k](Node& self) {
    Tensor& d = self.parents[0]->grad_buffer();
    const double g = (*self.grad)[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j)
        d[i * k + j] += g * (probs[i * k + j] - (j == labels[i] ? 1.0 : 0.0));
  });
}

}  // namespace wmark::tg
