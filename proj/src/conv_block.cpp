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
#include "wmark/conv_block.hpp"

#include <cmath>
#include <stdexcept>

namespace wmark {

Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.data()) v = sd * rng.normal();
  return t;
}

ConvBnRelu ConvBnRelu::create(tg::ParamSet& params, std::string name, std::size_t in_channels,
                              std::size_t out_channels, Rng& rng) {
  ConvBnRelu b;
  b.name = std::move(name);
  b.weight = params.add(b.name + ".conv.weight",
                        he_normal({out_channels, in_channels, 3, 3}, in_channels * 9, rng));
  b.bias = params.add(b.name + ".conv.bias", Tensor({out_channels}, 0.0));
  b.gamma = params.add(b.name + ".bn.gamma", Tensor({out_channels}, 1.0));
  b.beta = params.add(b.name + ".bn.beta", Tensor({out_channels}, 0.0));
  b.bn.reset(out_channels);
  return b;
}

tg::Var ConvBnRelu::forward(const tg::Var& x, tg::Mode mode) {
  return tg::relu(tg::batchnorm2d(tg::conv2d(x, weight, bias, 1, 1), gamma, beta, bn, mode));
}

tg::Var ConvBnRelu::forward_infer(const tg::Var& x) const {
  return tg::relu(tg::batchnorm2d(tg::conv2d(x, weight, bias, 1, 1), gamma, beta, bn));
}

void ConvBnRelu::append_stats(std::vector<NamedTensor>& out) const {
  const std::size_t c = bn.running_mean.size();
  out.push_back({name + ".bn.running_mean", Tensor({c}, bn.running_mean)});
  out.push_back({name + ".bn.running_var", Tensor({c}, bn.running_var)});
}

void ConvBnRelu::load_stats(const Container& c) {
  const Tensor& m = c.tensor(name + ".bn.running_mean");
  const Tensor& v = c.tensor(name + ".bn.running_var");
  const std::size_t ch = gamma->value.size();
  if (m.size() != ch || v.size() != ch)
    throw std::runtime_error("running stats for '" + name + "' have the wrong channel count");
  bn.running_mean = m.vec();
  bn.running_var = v.vec();
}

void copy_params(const tg::ParamSet& src, tg::ParamSet& dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("copy_params: parameter count differs");
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& s = src.entries()[i];
    auto& d = dst.entries()[i];
    if (s.name != d.name || !s.param->value.same_shape(d.param->value))
      throw std::invalid_argument("copy_params: parameter '" + s.name + "' does not match");
    d.param->value = s.param->value;
    d.m1 = s.m1;
    d.m2 = s.m2;
  }
  dst.set_step(src.step());
}

}  // namespace wmark
