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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace wmark {

// C x H x W image with real pixels in [0,1], stored plane by plane.
class Image {
 public:
  Image() = default;
  Image(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  Image(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> pixels);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return pixels_[(c * height_ + y) * width_ + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels_[(c * height_ + y) * width_ + x];
  }
  std::vector<double>& pixels() { return pixels_; }
  const std::vector<double>& pixels() const { return pixels_; }

  bool same_shape(const Image& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  // Throws std::invalid_argument if a pixel is NaN or outside [0,1].
  void validate() const;
  std::string shape_string() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t channels_ = 0, height_ = 0, width_ = 0;
  std::vector<double> pixels_;
};

// Binary P6 with maxval 255. Pixels map to v/255.
Image load_ppm(const std::filesystem::path& path);
Image decode_ppm(const std::string& bytes);
// Needs 3 channels. Each value is written as floor(255*p + 0.5).
void save_ppm(const Image& img, const std::filesystem::path& path);
std::string encode_ppm(const Image& img);

// Binary P5 counterparts for single-channel images.
Image load_pgm(const std::filesystem::path& path);
Image decode_pgm(const std::string& bytes);
void save_pgm(const Image& img, const std::filesystem::path& path);

// Dispatches on the magic: P6 -> 3 channels, P5 -> 1 channel.
Image load_pnm(const std::filesystem::path& path);
void save_pnm(const Image& img, const std::filesystem::path& path);

// 10*log10(1/MSE) on the [0,1] scale; +infinity for identical images.
double psnr(const Image& a, const Image& b);
double mse(const Image& a, const Image& b);

}  // namespace wmark
