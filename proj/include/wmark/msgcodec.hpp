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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmark {

// L-bit watermark payload; every element is exactly 0 or 1.
class Message {
 public:
  Message() = default;
  // Throws std::invalid_argument on an element outside {0,1}.
  explicit Message(std::vector<std::uint8_t> bits);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  Message complement() const;
  // "0110..." form used by the CLI.
  std::string to_string() const;
  static Message parse(std::string_view text);

  friend bool operator==(const Message&, const Message&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Binary glyph whose row-major pixels form a message.
struct SignatureBitmap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top-left first

  friend bool operator==(const SignatureBitmap&, const SignatureBitmap&) = default;
};

// i.i.d. fair bits from Rng(seed): bit i is the top bit of the i-th draw.
Message random_message(std::uint64_t seed, int length);

Message bitmap_to_message(const SignatureBitmap& bmp);
SignatureBitmap message_to_bitmap(const Message& msg, std::size_t height, std::size_t width);

// Bit i is 1 iff logit i > 0; an exact 0 maps to 0. NaN is rejected.
Message logits_to_message(std::span<const double> logits);

// Fraction of agreeing positions.
double bit_accuracy(const Message& m, const Message& m_hat);

// The bundled 8 x 6 'S' glyph (48 bits).
SignatureBitmap s_glyph();

// Text form: first line "H W", then H lines of W characters in {0,1}.
SignatureBitmap parse_bitmap(std::string_view text);
std::string format_bitmap(const SignatureBitmap& bmp);
SignatureBitmap load_bitmap(const std::filesystem::path& path);
void save_bitmap(const SignatureBitmap& bmp, const std::filesystem::path& path);

}  // namespace wmark
