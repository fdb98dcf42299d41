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
#include <span>

#include "wmark/autograd.hpp"
#include "wmark/transforms.hpp"

namespace wmark {

// Applies the transform (kind, factor) to every image of an N x C x H x W
// batch exactly as apply_transform does, with seeds[i] driving image i's crop
// offset. All images share one output size.
//
// Backward: crop, resize, brightness and contrast use their exact
// vector-Jacobian products (zero where clamping binds). JPEG passes the
// incoming gradient through unchanged.
tg::Var transform_batch(const tg::Var& x, TransformKind kind, double factor,
                        std::span<const std::uint64_t> seeds);

}  // namespace wmark
