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
#include "wmark/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wmark {

Image::Image(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width),
      pixels_(channels * height * width, fill) {
  if (channels == 0 || height == 0 || width == 0)
    throw std::invalid_argument("image dimensions must be positive, got " + shape_string());
}

Image::Image(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> pixels)
    : channels_(channels), height_(height), width_(width), pixels_(std::move(pixels)) {
  if (channels == 0 || height == 0 || width == 0)
    throw std::invalid_argument("image dimensions must be positive, got " + shape_string());
  if (pixels_.size() != channels * height * width)
    throw std::invalid_argument("image " + shape_string() + " given " +
                                std::to_string(pixels_.size()) + " pixels");
}

void Image::validate() const {
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    const double v = pixels_[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("pixel " + std::to_string(i) + " of image " + shape_string() +
                                  " is " + std::to_string(v) + ", outside [0,1]");
  }
}

std::string Image::shape_string() const {
  return std::to_string(channels_) + "x" + std::to_string(height_) + "x" + std::to_string(width_);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : b_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const unsigned char ch = static_cast<unsigned char>(b_[pos_]);
      if (std::isspace(ch)) {
        ++pos_;
      } else if (ch == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(b_[pos_] - '0');
      if (v > 1u << 24) fail(std::string(field) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected ") + field, start);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_of_header() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      fail("expected single whitespace after maxval", pos_);
    ++pos_;
  }

  [[noreturn]] static void fail(const std::string& what, std::size_t offset) {
    throw std::runtime_error("PNM parse error at byte offset " + std::to_string(offset) + ": " + what);
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 2;
};

Image decode_pnm_bytes(const std::string& bytes, char kind, std::size_t channels) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != kind)
    HeaderReader::fail(std::string("magic is not P") + kind +
                           (bytes.size() >= 2 ? " (found '" + bytes.substr(0, 2) + "')" : ""),
                       0);
  HeaderReader r(bytes);
  const unsigned long w = r.number("width");
  const unsigned long h = r.number("height");
  const std::size_t maxval_at = r.pos();
  const unsigned long maxval = r.number("maxval");
  if (w == 0 || h == 0) HeaderReader::fail("zero width or height", maxval_at);
  if (maxval != 255) HeaderReader::fail("maxval " + std::to_string(maxval) + " unsupported (need 255)", maxval_at);
  r.end_of_header();
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  const std::size_t have = bytes.size() - r.pos();
  if (have < need)
    HeaderReader::fail("truncated raster: need " + std::to_string(need) + " bytes, have " +
                           std::to_string(have),
                       bytes.size());
  Image img(channels, h, w);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + r.pos());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        img.at(c, y, x) = raster[(y * w + x) * channels + c] / 255.0;
  return img;
}

std::string encode_pnm_bytes(const Image& img, char kind) {
  img.validate();
  std::string out = std::string("P") + kind + "\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + img.size());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const double v = std::floor(255.0 * img.at(c, y, x) + 0.5);
        out[header + (y * img.width() + x) * img.channels() + c] =
            static_cast<char>(static_cast<unsigned char>(v));
      }
  return out;
}

}  // namespace

Image decode_ppm(const std::string& bytes) { return decode_pnm_bytes(bytes, '6', 3); }
Image decode_pgm(const std::string& bytes) { return decode_pnm_bytes(bytes, '5', 1); }
Image load_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }
Image load_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

std::string encode_ppm(const Image& img) {
  if (img.channels() != 3)
    throw std::invalid_argument("P6 needs 3 channels, image has " + std::to_string(img.channels()));
  return encode_pnm_bytes(img, '6');
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  write_file(path, encode_ppm(img));
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  if (img.channels() != 1)
    throw std::invalid_argument("P5 needs 1 channel, image has " + std::to_string(img.channels()));
  write_file(path, encode_pnm_bytes(img, '5'));
}

Image load_pnm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  return decode_ppm(bytes);
}

void save_pnm(const Image& img, const std::filesystem::path& path) {
  if (img.channels() == 1)
    save_pgm(img, path);
  else
    save_ppm(img, path);
}

double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("image shapes differ: " + a.shape_string() + " vs " + b.shape_string());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels()[i] - b.pixels()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

}  // namespace wmark
