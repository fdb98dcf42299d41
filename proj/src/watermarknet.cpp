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
#include "wmark/watermarknet.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

#include "wmark/container.hpp"

namespace wmark {

namespace {
constexpr std::string_view kMagic = "WMF1";
}

void WatermarkConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive(message_length, "message_length");
  positive(base_channels, "base_channels");
  positive(encoder_blocks, "encoder_blocks");
  positive(decoder_blocks, "decoder_blocks");
  positive(image_channels, "image_channels");
  if (message_length > 256)
    throw std::invalid_argument("message_length " + std::to_string(message_length) + " exceeds 256");
  if (image_channels != 1 && image_channels != 3)
    throw std::invalid_argument("image_channels must be 1 or 3");
}

WatermarkModel WatermarkModel::build(const WatermarkConfig& config, std::uint64_t seed) {
  config.validate();
  WatermarkModel m;
  m.config_ = config;
  Rng rng(seed);
  const auto c = static_cast<std::size_t>(config.image_channels);
  const auto l = static_cast<std::size_t>(config.message_length);
  const auto f = static_cast<std::size_t>(config.base_channels);

  std::size_t in = c + l;
  for (int i = 0; i < config.encoder_blocks; ++i) {
    m.enc_blocks_.push_back(
        ConvBnRelu::create(m.enc_params_, "enc.block" + std::to_string(i), in, f, rng));
    in = f;
  }
  const std::size_t fused = f + c + l;
  m.enc_final_w_ = m.enc_params_.add("enc.final.weight", he_normal({c, fused, 3, 3}, fused * 9, rng));
  m.enc_final_b_ = m.enc_params_.add("enc.final.bias", Tensor({c}, 0.0));

  in = c;
  for (int i = 0; i < config.decoder_blocks; ++i) {
    m.dec_blocks_.push_back(
        ConvBnRelu::create(m.dec_params_, "dec.block" + std::to_string(i), in, f, rng));
    in = f;
  }
  m.dec_blocks_.push_back(ConvBnRelu::create(m.dec_params_, "dec.msg_block", in, l, rng));
  m.dec_linear_w_ = m.dec_params_.add("dec.linear.weight", he_normal({l, l}, l, rng));
  m.dec_linear_b_ = m.dec_params_.add("dec.linear.bias", Tensor({l}, 0.0));
  return m;
}

WatermarkModel WatermarkModel::clone() const {
  WatermarkModel m = build(config_, 0);
  copy_params(enc_params_, m.enc_params_);
  copy_params(dec_params_, m.dec_params_);
  for (std::size_t i = 0; i < enc_blocks_.size(); ++i) m.enc_blocks_[i].bn = enc_blocks_[i].bn;
  for (std::size_t i = 0; i < dec_blocks_.size(); ++i) m.dec_blocks_[i].bn = dec_blocks_[i].bn;
  return m;
}

void WatermarkModel::set_step(std::int64_t step) {
  enc_params_.set_step(step);
  dec_params_.set_step(step);
}

void WatermarkModel::check_images(const Tensor& images, const char* op) const {
  if (images.rank() != 4)
    throw ShapeError(std::string(op) + ": images must be N x C x H x W, got " + shape_str(images.shape()));
  if (images.dim(1) != static_cast<std::size_t>(config_.image_channels))
    throw ShapeError(std::string(op) + ": image axis 1 has " + std::to_string(images.dim(1)) +
                     " channels, model expects " + std::to_string(config_.image_channels));
}

Tensor WatermarkModel::message_planes(const Tensor& messages, std::size_t h, std::size_t w) const {
  const std::size_t l = message_length();
  if (messages.rank() != 2 || messages.dim(1) != l)
    throw ShapeError("encode: messages must be N x " + std::to_string(l) + ", got " +
                     shape_str(messages.shape()));
  const std::size_t n = messages.dim(0);
  Tensor planes({n, l, h, w});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < l; ++b) {
      const double v = messages[i * l + b];
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("encode: message bit " + std::to_string(b) + " is not 0 or 1");
      double* p = planes.ptr() + (i * l + b) * h * w;
      std::fill(p, p + h * w, v);
    }
  return planes;
}

template <class Self>
tg::Var WatermarkModel::encode_impl(Self& self, const tg::Var& images, const Tensor& messages,
                                    tg::Mode mode) {
  self.check_images(images->value, "encode");
  const Tensor& iv = images->value;
  if (messages.rank() >= 1 && messages.dim(0) != iv.dim(0))
    throw ShapeError("encode: " + std::to_string(messages.dim(0)) + " messages for " +
                     std::to_string(iv.dim(0)) + " images");
  tg::Var planes = tg::constant(self.message_planes(messages, iv.dim(2), iv.dim(3)));
  tg::Var x = tg::concat_channels(images, planes);
  for (auto& block : self.enc_blocks_) {
    if constexpr (std::is_const_v<Self>)
      x = block.forward_infer(x);
    else
      x = block.forward(x, mode);
  }
  x = tg::concat_channels(tg::concat_channels(x, images), planes);
  return tg::sigmoid(tg::conv2d(x, self.enc_final_w_, self.enc_final_b_, 1, 1));
}

template <class Self>
tg::Var WatermarkModel::decode_impl(Self& self, const tg::Var& images, tg::Mode mode) {
  self.check_images(images->value, "decode");
  const Tensor& iv = images->value;
  if (iv.dim(2) < kMinDecodeExtent || iv.dim(3) < kMinDecodeExtent)
    throw std::invalid_argument("decode: image " + std::to_string(iv.dim(2)) + "x" +
                                std::to_string(iv.dim(3)) + " is smaller than the " +
                                std::to_string(kMinDecodeExtent) + "x" +
                                std::to_string(kMinDecodeExtent) + " minimum");
  tg::Var x = images;
  for (auto& block : self.dec_blocks_) {
    if constexpr (std::is_const_v<Self>)
      x = block.forward_infer(x);
    else
      x = block.forward(x, mode);
  }
  return tg::affine(tg::global_avg_pool(x), self.dec_linear_w_, self.dec_linear_b_);
}

tg::Var WatermarkModel::encode(const tg::Var& images, const Tensor& messages, tg::Mode mode) {
  if (mode == tg::Mode::kInfer) return encode_impl(std::as_const(*this), images, messages, mode);
  return encode_impl(*this, images, messages, mode);
}

tg::Var WatermarkModel::encode(const tg::Var& images, const Tensor& messages) const {
  return encode_impl(*this, images, messages, tg::Mode::kInfer);
}

tg::Var WatermarkModel::decode(const tg::Var& images, tg::Mode mode) {
  if (mode == tg::Mode::kInfer) return decode_impl(std::as_const(*this), images, mode);
  return decode_impl(*this, images, mode);
}

tg::Var WatermarkModel::decode(const tg::Var& images) const {
  return decode_impl(*this, images, tg::Mode::kInfer);
}

Image WatermarkModel::encode(const Image& img, const Message& msg) const {
  if (msg.size() != message_length())
    throw std::invalid_argument("encode: message has " + std::to_string(msg.size()) +
                                " bits, model expects " + std::to_string(message_length()));
  const Image* one = &img;
  const Tensor out = encode(tg::constant(images_to_tensor({one, 1})),
                            messages_to_tensor({&msg, 1}))->value;
  return tensor_to_image(out, 0);
}

std::vector<double> WatermarkModel::decode_logits(const Image& img) const {
  return decode(tg::constant(images_to_tensor({&img, 1})))->value.vec();
}

std::vector<double> WatermarkModel::decode_logits(const Image& img, tg::Mode mode) {
  return decode(tg::constant(images_to_tensor({&img, 1})), mode)->value.vec();
}

Message WatermarkModel::extract(const Image& img) const {
  return logits_to_message(decode_logits(img));
}

std::vector<NamedTensor> WatermarkModel::state_tensors() const {
  std::vector<NamedTensor> out;
  for (const auto& e : enc_params_.entries()) out.push_back({e.name, e.param->value});
  for (const auto& e : dec_params_.entries()) out.push_back({e.name, e.param->value});
  for (const auto& b : enc_blocks_) b.append_stats(out);
  for (const auto& b : dec_blocks_) b.append_stats(out);
  return out;
}

void WatermarkModel::load_state(const Container& c) {
  auto load = [&](tg::ParamSet& ps) {
    for (auto& e : ps.entries()) {
      const Tensor& t = c.tensor(e.name);
      if (!t.same_shape(e.param->value))
        throw std::runtime_error("tensor '" + e.name + "' has shape " + shape_str(t.shape()) +
                                 ", config implies " + shape_str(e.param->value.shape()));
      e.param->value = t;
    }
  };
  load(enc_params_);
  load(dec_params_);
  for (auto& b : enc_blocks_) b.load_stats(c);
  for (auto& b : dec_blocks_) b.load_stats(c);
}

Tensor images_to_tensor(std::span<const Image> images) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor: no images");
  const Image& first = images.front();
  Tensor t({images.size(), first.channels(), first.height(), first.width()});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(first))
      throw ShapeError("images_to_tensor: image " + std::to_string(i) + " is " +
                       images[i].shape_string() + ", expected " + first.shape_string());
    std::copy(images[i].pixels().begin(), images[i].pixels().end(), t.ptr() + i * first.size());
  }
  return t;
}

Image tensor_to_image(const Tensor& t, std::size_t index) {
  if (t.rank() != 4 || index >= t.dim(0))
    throw ShapeError("tensor_to_image: bad tensor " + shape_str(t.shape()));
  const std::size_t c = t.dim(1), h = t.dim(2), w = t.dim(3);
  const std::size_t n = c * h * w;
  return Image(c, h, w, std::vector<double>(t.ptr() + index * n, t.ptr() + (index + 1) * n));
}

Tensor messages_to_tensor(std::span<const Message> messages) {
  if (messages.empty()) throw std::invalid_argument("messages_to_tensor: no messages");
  const std::size_t l = messages.front().size();
  Tensor t({messages.size(), l});
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i].size() != l) throw ShapeError("messages_to_tensor: ragged message lengths");
    for (std::size_t b = 0; b < l; ++b) t[i * l + b] = messages[i][b];
  }
  return t;
}

std::string encode_model(const WatermarkModel& model) {
  Container c;
  const WatermarkConfig& cfg = model.config();
  c.fields = {{"format", "WMF1"},
              {"message_length", std::to_string(cfg.message_length)},
              {"base_channels", std::to_string(cfg.base_channels)},
              {"encoder_blocks", std::to_string(cfg.encoder_blocks)},
              {"decoder_blocks", std::to_string(cfg.decoder_blocks)},
              {"image_channels", std::to_string(cfg.image_channels)},
              {"step", std::to_string(model.step())}};
  c.tensors = model.state_tensors();
  return encode_container(kMagic, c);
}

WatermarkModel decode_model(const std::string& bytes) {
  const Container c = decode_container(kMagic, bytes);
  WatermarkConfig cfg;
  cfg.message_length = static_cast<int>(c.int_field("message_length"));
  cfg.base_channels = static_cast<int>(c.int_field("base_channels"));
  cfg.encoder_blocks = static_cast<int>(c.int_field("encoder_blocks"));
  cfg.decoder_blocks = static_cast<int>(c.int_field("decoder_blocks"));
  cfg.image_channels = static_cast<int>(c.int_field("image_channels"));
  WatermarkModel m = WatermarkModel::build(cfg, 0);
  const std::size_t expected = m.state_tensors().size();
  if (c.tensors.size() != expected)
    throw std::runtime_error("weight file holds " + std::to_string(c.tensors.size()) +
                             " tensors, config implies " + std::to_string(expected));
  m.load_state(c);
  m.set_step(c.int_field("step"));
  return m;
}

void save_model(const WatermarkModel& model, const std::filesystem::path& path) {
  const std::string bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

WatermarkModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_model(ss.str());
}

}  // namespace wmark
