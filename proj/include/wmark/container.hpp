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

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmark/tensor.hpp"

// Weight container shared by the watermark ("WMF1") and embedder ("EMB1")
// files:
//
//   bytes 0..3   magic
//   bytes 4..7   header length H, uint32 little-endian
//   next H bytes UTF-8 header: "key=value" lines, then one
//                "tensor <name> <d0> <d1> ..." line per tensor
//   remainder    tensor payloads in header order, IEEE-754 binary32
//                little-endian, row-major
namespace wmark {

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Container {
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<NamedTensor> tensors;

  // Throws std::runtime_error naming the key if absent.
  const std::string& field(std::string_view key) const;
  long long int_field(std::string_view key) const;
  const Tensor& tensor(std::string_view name) const;
};

std::string encode_container(std::string_view magic, const Container& c);
Container decode_container(std::string_view magic, const std::string& bytes);

void write_container(const std::filesystem::path& path, std::string_view magic, const Container& c);
Container read_container(const std::filesystem::path& path, std::string_view magic);

// Rounds every element through binary32, as persisted.
Tensor round_to_f32(const Tensor& t);

}  // namespace wmark
