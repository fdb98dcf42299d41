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
#include <vector>

#include "wmark/autograd.hpp"
#include "wmark/bioeval.hpp"
#include "wmark/conv_block.hpp"
#include "wmark/image.hpp"
#include "wmark/optim.hpp"

namespace wmark {

struct EmbedderConfig {
  int embedding_dim = 32;  // d
  int classes = 2;         // K
  int base_channels = 16;
  int image_channels = 3;
  int input_size = 32;     // square input side

  void validate() const;
  friend bool operator==(const EmbedderConfig&, const EmbedderConfig&) = default;
};

struct EmbedderTrainConfig;
struct EmbedderTrainResult;

// Small face-recognition stand-in: three Conv-BN-ReLU blocks, global average
// pooling, an affine layer to d features (the embedding) and an affine
// classifier to K logits.
class EmbedderModel {
 public:
  static constexpr int kBlocks = 3;
  static EmbedderModel build(const EmbedderConfig& config, std::uint64_t seed);

  EmbedderModel(EmbedderModel&&) = default;
  EmbedderModel& operator=(EmbedderModel&&) = default;
  EmbedderModel(const EmbedderModel&) = delete;
  EmbedderModel& operator=(const EmbedderModel&) = delete;

  const EmbedderConfig& config() const { return config_; }
  tg::ParamSet& params() { return params_; }
  const tg::ParamSet& params() const { return params_; }

  // images: N x C x S x S -> N x d.
  tg::Var features(const tg::Var& images, tg::Mode mode);
  tg::Var features(const tg::Var& images) const;
  // N x d -> N x K.
  tg::Var classify(const tg::Var& features) const;

  // Infer-mode embedding of one image whose size matches input_size.
  std::vector<double> embed(const Image& img) const;

  std::vector<NamedTensor> state_tensors() const;
  void load_state(const Container& c);

 private:
  friend EmbedderTrainResult train_embedder(std::span<const Image>, std::span<const std::size_t>,
                                            const EmbedderConfig&, const EmbedderTrainConfig&);
  EmbedderModel() = default;
  template <class Self>
  static tg::Var features_impl(Self& self, const tg::Var& images, tg::Mode mode);

  EmbedderConfig config_;
  tg::ParamSet params_;
  std::vector<ConvBnRelu> blocks_;
  tg::Var embed_w_, embed_b_, class_w_, class_b_;
};

struct EmbedderTrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct EmbedderTrainResult {
  EmbedderModel model;
  std::vector<double> loss_history;  // mean cross-entropy per epoch, entry 0 before training
};

// Softmax cross-entropy training. labels[i] < K; every class needs at least
// two images. The model is built from `train.seed`.
EmbedderTrainResult train_embedder(std::span<const Image> images, std::span<const std::size_t> labels,
                                   const EmbedderConfig& config, const EmbedderTrainConfig& train);

// Embeds every image, resizing to input_size when `resize` is set (otherwise
// a size mismatch throws). identities[i] labels images[i].
std::vector<Embedding> embed_images(const EmbedderModel& model, std::span<const Image> images,
                                    std::span<const std::string> identities, SourceTag source,
                                    bool resize = false);

// "EMB1" container; see container.hpp for the byte layout.
std::string encode_embedder(const EmbedderModel& model);
EmbedderModel decode_embedder(const std::string& bytes);
void save_embedder(const EmbedderModel& model, const std::filesystem::path& path);
EmbedderModel load_embedder(const std::filesystem::path& path);

}  // namespace wmark
