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
#include <vector>

#include "wmark/image.hpp"

// Procedural image sources for tests, demos and desk-scale experiments.
namespace wmark::synth {

// Colour texture: a few random oriented gratings and soft blobs mixed across
// channels, rescaled into [0.05, 0.95].
Image texture(std::uint64_t seed, std::size_t channels, std::size_t height, std::size_t width);
std::vector<Image> textures(std::uint64_t seed, std::size_t count, std::size_t channels,
                            std::size_t height, std::size_t width);

// Face-like identity images: every identity owns a fixed layout of blobs and
// a tint; each image adds a small shift, brightness jitter and pixel noise.
struct IdentitySet {
  std::vector<Image> images;
  std::vector<std::size_t> labels;  // identity index per image
};
IdentitySet identities(std::uint64_t seed, std::size_t identity_count, std::size_t images_per_identity,
                       std::size_t channels, std::size_t height, std::size_t width);

}  // namespace wmark::synth
