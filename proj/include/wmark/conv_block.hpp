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
#include <string>
#include <vector>

#include "wmark/autograd.hpp"
#include "wmark/container.hpp"
#include "wmark/optim.hpp"
#include "wmark/rng.hpp"

namespace wmark {

// He-normal initialised tensor: N(0, 2 / fan_in).
Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng);

// 3x3 stride-1 pad-1 convolution followed by batch norm and ReLU.
struct ConvBnRelu {
  std::string name;
  tg::Var weight, bias, gamma, beta;
  tg::BatchNormState bn;

  static ConvBnRelu create(tg::ParamSet& params, std::string name, std::size_t in_channels,
                           std::size_t out_channels, Rng& rng);
  tg::Var forward(const tg::Var& x, tg::Mode mode);
  tg::Var forward_infer(const tg::Var& x) const;

  // Running statistics as tensors "<name>.bn.running_mean/var".
  void append_stats(std::vector<NamedTensor>& out) const;
  void load_stats(const Container& c);
};

// Copies parameter values (and moment buffers, step) from `src` into `dst`;
// both must hold the same names and shapes.
void copy_params(const tg::ParamSet& src, tg::ParamSet& dst);

}  // namespace wmark
