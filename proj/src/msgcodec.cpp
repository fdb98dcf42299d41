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
#include "wmark/msgcodec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wmark/rng.hpp"

namespace wmark {

Message::Message(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] > 1)
      throw std::invalid_argument("message bit " + std::to_string(i) + " is " +
                                  std::to_string(bits_[i]) + ", expected 0 or 1");
}

Message Message::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ^ 1u;
  return Message(std::move(out));
}

std::string Message::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

Message Message::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  for (char ch : text) {
    if (ch == '0' || ch == '1')
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    else if (ch != ' ' && ch != '\n' && ch != '\r' && ch != '\t')
      throw std::invalid_argument(std::string("message text contains '") + ch + "'");
  }
  if (bits.empty()) throw std::invalid_argument("message text has no bits");
  return Message(std::move(bits));
}

Message random_message(std::uint64_t seed, int length) {
  if (length <= 0)
    throw std::invalid_argument("message length must be positive, got " + std::to_string(length));
  Rng rng(seed);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(length));
  for (auto& b : bits) b = rng.bit() ? 1 : 0;
  return Message(std::move(bits));
}

Message bitmap_to_message(const SignatureBitmap& bmp) {
  if (bmp.height == 0 || bmp.width == 0 || bmp.pixels.size() != bmp.height * bmp.width)
    throw std::invalid_argument("bitmap is " + std::to_string(bmp.height) + "x" +
                                std::to_string(bmp.width) + " but holds " +
                                std::to_string(bmp.pixels.size()) + " pixels");
  for (std::size_t i = 0; i < bmp.pixels.size(); ++i)
    if (bmp.pixels[i] > 1)
      throw std::invalid_argument("bitmap pixel (" + std::to_string(i / bmp.width) + "," +
                                  std::to_string(i % bmp.width) + ") is not binary");
  return Message(bmp.pixels);
}

SignatureBitmap message_to_bitmap(const Message& msg, std::size_t height, std::size_t width) {
  if (height * width != msg.size() || height == 0)
    throw std::invalid_argument("cannot lay out " + std::to_string(msg.size()) + " bits as " +
                                std::to_string(height) + "x" + std::to_string(width));
  return {height, width, std::vector<std::uint8_t>(msg.bits().begin(), msg.bits().end())};
}

Message logits_to_message(std::span<const double> logits) {
  std::vector<std::uint8_t> bits(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (std::isnan(logits[i])) throw std::invalid_argument("NaN logit at index " + std::to_string(i));
    bits[i] = logits[i] > 0.0 ? 1 : 0;
  }
  return Message(std::move(bits));
}

double bit_accuracy(const Message& m, const Message& m_hat) {
  if (m.size() != m_hat.size())
    throw std::invalid_argument("bit_accuracy: lengths " + std::to_string(m.size()) + " and " +
                                std::to_string(m_hat.size()) + " differ");
  if (m.empty()) throw std::invalid_argument("bit_accuracy: empty messages");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < m.size(); ++i) agree += m[i] == m_hat[i];
  return static_cast<double>(agree) / static_cast<double>(m.size());
}

SignatureBitmap s_glyph() {
  static constexpr const char* kRows[] = {
      "011110",
      "110011",
      "110000",
      "011100",
      "000110",
      "000011",
      "110011",
      "011110",
  };
  SignatureBitmap bmp{8, 6, {}};
  for (const char* row : kRows)
    for (int j = 0; j < 6; ++j) bmp.pixels.push_back(static_cast<std::uint8_t>(row[j] - '0'));
  return bmp;
}

SignatureBitmap parse_bitmap(std::string_view text) {
  std::istringstream in{std::string(text)};
  SignatureBitmap bmp;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("bitmap: missing 'H W' header line");
  {
    std::istringstream hdr(line);
    long long h = 0, w = 0;
    if (!(hdr >> h >> w) || h <= 0 || w <= 0)
      throw std::invalid_argument("bitmap: header '" + line + "' is not two positive integers");
    bmp.height = static_cast<std::size_t>(h);
    bmp.width = static_cast<std::size_t>(w);
  }
  for (std::size_t r = 0; r < bmp.height; ++r) {
    if (!std::getline(in, line))
      throw std::invalid_argument("bitmap: expected " + std::to_string(bmp.height) +
                                  " rows, found " + std::to_string(r));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() != bmp.width)
      throw std::invalid_argument("bitmap: row " + std::to_string(r + 1) + " has " +
                                  std::to_string(line.size()) + " characters, expected " +
                                  std::to_string(bmp.width));
    for (char ch : line) {
      if (ch != '0' && ch != '1')
        throw std::invalid_argument("bitmap: row " + std::to_string(r + 1) + " contains '" + ch + "'");
      bmp.pixels.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
  }
  return bmp;
}

std::string format_bitmap(const SignatureBitmap& bmp) {
  std::string out = std::to_string(bmp.height) + " " + std::to_string(bmp.width) + "\n";
  for (std::size_t r = 0; r < bmp.height; ++r) {
    for (std::size_t c = 0; c < bmp.width; ++c) out += bmp.pixels[r * bmp.width + c] ? '1' : '0';
    out += '\n';
  }
  return out;
}

SignatureBitmap load_bitmap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bitmap file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bitmap(ss.str());
}

void save_bitmap(const SignatureBitmap& bmp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write bitmap file " + path.string());
  out << format_bitmap(bmp);
}

}  // namespace wmark
