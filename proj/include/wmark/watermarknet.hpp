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
#include <vector>

#include "wmark/autograd.hpp"
#include "wmark/conv_block.hpp"
#include "wmark/image.hpp"
#include "wmark/msgcodec.hpp"
#include "wmark/optim.hpp"

namespace wmark {

struct WatermarkConfig {
  int message_length = 48;
  int base_channels = 64;
  int encoder_blocks = 4;
  int decoder_blocks = 7;
  int image_channels = 3;

  // All fields positive, message_length <= 256, image_channels in {1,3}.
  void validate() const;
  friend bool operator==(const WatermarkConfig&, const WatermarkConfig&) = default;
};

// Smallest spatial extent the decoder accepts.
inline constexpr std::size_t kMinDecodeExtent = 8;

// Encoder f(I, m) -> I_w and decoder g(I_w) -> logits.
//
// Encoder: the L message bits become L constant planes at image resolution,
// stacked after the image; encoder_blocks Conv-BN-ReLU blocks follow; the
// features are stacked with the image and the message planes again and a
// final 3x3 conv plus sigmoid produces the watermarked image.
//
// Decoder: decoder_blocks Conv-BN-ReLU blocks, one more block with L
// filters, global average pooling, and an L x L affine layer.
class WatermarkModel {
 public:
  static WatermarkModel build(const WatermarkConfig& config, std::uint64_t seed);

  WatermarkModel(WatermarkModel&&) = default;
  WatermarkModel& operator=(WatermarkModel&&) = default;
  WatermarkModel(const WatermarkModel&) = delete;
  WatermarkModel& operator=(const WatermarkModel&) = delete;

  // Deep copy: parameters, optimiser moments, running stats, step.
  WatermarkModel clone() const;

  const WatermarkConfig& config() const { return config_; }
  std::size_t message_length() const { return static_cast<std::size_t>(config_.message_length); }

  tg::ParamSet& encoder_params() { return enc_params_; }
  tg::ParamSet& decoder_params() { return dec_params_; }
  const tg::ParamSet& encoder_params() const { return enc_params_; }
  const tg::ParamSet& decoder_params() const { return dec_params_; }

  std::int64_t step() const { return enc_params_.step(); }
  void set_step(std::int64_t step);

  // images: N x C x H x W; messages: N x L of {0,1}. Returns N x C x H x W.
  tg::Var encode(const tg::Var& images, const Tensor& messages, tg::Mode mode);
  tg::Var encode(const tg::Var& images, const Tensor& messages) const;  // infer
  // images: N x C x H x W (H,W >= 8). Returns N x L logits.
  tg::Var decode(const tg::Var& images, tg::Mode mode);
  tg::Var decode(const tg::Var& images) const;  // infer

  Image encode(const Image& img, const Message& msg) const;
  std::vector<double> decode_logits(const Image& img) const;
  std::vector<double> decode_logits(const Image& img, tg::Mode mode);
  Message extract(const Image& img) const;

  // Every persisted tensor (parameters, then running stats) in file order.
  std::vector<NamedTensor> state_tensors() const;
  // Copies values from `c`; shapes must match this model's config.
  void load_state(const Container& c);

 private:
  WatermarkModel() = default;
  void check_images(const Tensor& images, const char* op) const;
  Tensor message_planes(const Tensor& messages, std::size_t h, std::size_t w) const;
  template <class Self>
  static tg::Var encode_impl(Self& self, const tg::Var& images, const Tensor& messages,
                             tg::Mode mode);
  template <class Self>
  static tg::Var decode_impl(Self& self, const tg::Var& images, tg::Mode mode);

  WatermarkConfig config_;
  tg::ParamSet enc_params_;
  tg::ParamSet dec_params_;
  std::vector<ConvBnRelu> enc_blocks_;
  tg::Var enc_final_w_, enc_final_b_;
  std::vector<ConvBnRelu> dec_blocks_;  // decoder_blocks + the L-filter block
  tg::Var dec_linear_w_, dec_linear_b_;
};

// Stacks images into N x C x H x W; all images must share a shape.
Tensor images_to_tensor(std::span<const Image> images);
Image tensor_to_image(const Tensor& t, std::size_t index);
// N x L tensor of bits.
Tensor messages_to_tensor(std::span<const Message> messages);

// "WMF1" container; see container.hpp for the byte layout.
void save_model(const WatermarkModel& model, const std::filesystem::path& path);
WatermarkModel load_model(const std::filesystem::path& path);
std::string encode_model(const WatermarkModel& model);
WatermarkModel decode_model(const std::string& bytes);

}  // namespace wmark
