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
#include "wmark/embedder.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "wmark/container.hpp"
#include "wmark/rng.hpp"
#include "wmark/transforms.hpp"
#include "wmark/watermarknet.hpp"

namespace wmark {

namespace {
constexpr std::string_view kMagic = "EMB1";
}

void EmbedderConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive(embedding_dim, "embedding_dim");
  positive(base_channels, "base_channels");
  positive(image_channels, "image_channels");
  positive(input_size, "input_size");
  if (classes < 2) throw std::invalid_argument("embedder needs at least 2 classes, got " + std::to_string(classes));
  if (image_channels != 1 && image_channels != 3)
    throw std::invalid_argument("image_channels must be 1 or 3");
}

EmbedderModel EmbedderModel::build(const EmbedderConfig& config, std::uint64_t seed) {
  config.validate();
  EmbedderModel m;
  m.config_ = config;
  Rng rng(seed);
  const auto f = static_cast<std::size_t>(config.base_channels);
  const auto d = static_cast<std::size_t>(config.embedding_dim);
  const auto k = static_cast<std::size_t>(config.classes);
  std::size_t in = static_cast<std::size_t>(config.image_channels);
  for (int i = 0; i < kBlocks; ++i) {
    m.blocks_.push_back(ConvBnRelu::create(m.params_, "emb.block" + std::to_string(i), in, f, rng));
    in = f;
  }
  m.embed_w_ = m.params_.add("emb.embed.weight", he_normal({d, f}, f, rng));
  m.embed_b_ = m.params_.add("emb.embed.bias", Tensor({d}, 0.0));
  m.class_w_ = m.params_.add("emb.classifier.weight", he_normal({k, d}, d, rng));
  m.class_b_ = m.params_.add("emb.classifier.bias", Tensor({k}, 0.0));
  return m;
}

template <class Self>
tg::Var EmbedderModel::features_impl(Self& self, const tg::Var& images, tg::Mode mode) {
  const Tensor& v = images->value;
  const auto s = static_cast<std::size_t>(self.config_.input_size);
  if (v.rank() != 4 || v.dim(1) != static_cast<std::size_t>(self.config_.image_channels) ||
      v.dim(2) != s || v.dim(3) != s)
    throw ShapeError("embedder: expected N x " + std::to_string(self.config_.image_channels) + " x " +
                     std::to_string(s) + " x " + std::to_string(s) + " input, got " + shape_str(v.shape()));
  tg::Var x = images;
  for (auto& block : self.blocks_) {
    if constexpr (std::is_const_v<Self>)
      x = block.forward_infer(x);
    else
      x = block.forward(x, mode);
  }
  return tg::affine(tg::global_avg_pool(x), self.embed_w_, self.embed_b_);
}

tg::Var EmbedderModel::features(const tg::Var& images, tg::Mode mode) {
  if (mode == tg::Mode::kInfer) return features_impl(std::as_const(*this), images, mode);
  return features_impl(*this, images, mode);
}

tg::Var EmbedderModel::features(const tg::Var& images) const {
  return features_impl(*this, images, tg::Mode::kInfer);
}

tg::Var EmbedderModel::classify(const tg::Var& features) const {
  return tg::affine(features, class_w_, class_b_);
}

std::vector<double> EmbedderModel::embed(const Image& img) const {
  return features(tg::constant(images_to_tensor({&img, 1})))->value.vec();
}

std::vector<NamedTensor> EmbedderModel::state_tensors() const {
  std::vector<NamedTensor> out;
  for (const auto& e : params_.entries()) out.push_back({e.name, e.param->value});
  for (const auto& b : blocks_) b.append_stats(out);
  return out;
}

void EmbedderModel::load_state(const Container& c) {
  for (auto& e : params_.entries()) {
    const Tensor& t = c.tensor(e.name);
    if (!t.same_shape(e.param->value))
      throw std::runtime_error("tensor '" + e.name + "' has shape " + shape_str(t.shape()) +
                               ", config implies " + shape_str(e.param->value.shape()));
    e.param->value = t;
  }
  for (auto& b : blocks_) b.load_stats(c);
}

namespace {

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch)));
  return out;
}

tg::Var batch_loss(EmbedderModel& model, std::span<const Image> images,
                   std::span<const std::size_t> labels, const std::vector<std::size_t>& idx) {
  std::vector<Image> imgs;
  std::vector<std::size_t> lab;
  for (std::size_t i : idx) {
    imgs.push_back(images[i]);
    lab.push_back(labels[i]);
  }
  tg::Var f = model.features(tg::constant(images_to_tensor(imgs)), tg::Mode::kTrain);
  return tg::softmax_cross_entropy(model.classify(f), lab);
}

}  // namespace

EmbedderTrainResult train_embedder(std::span<const Image> images, std::span<const std::size_t> labels,
                                   const EmbedderConfig& config, const EmbedderTrainConfig& train) {
  config.validate();
  if (images.size() != labels.size())
    throw std::invalid_argument("train_embedder: " + std::to_string(images.size()) + " images but " +
                                std::to_string(labels.size()) + " labels");
  if (train.epochs < 0) throw std::invalid_argument("train_embedder: epochs must be >= 0");
  if (train.batch_size < 2) throw std::invalid_argument("train_embedder: batch_size must be >= 2");
  std::map<std::size_t, std::size_t> per_class;
  for (std::size_t l : labels) {
    if (l >= static_cast<std::size_t>(config.classes))
      throw std::invalid_argument("train_embedder: label " + std::to_string(l) + " outside [0, " +
                                  std::to_string(config.classes) + ")");
    ++per_class[l];
  }
  if (per_class.size() < 2) throw std::invalid_argument("train_embedder: need at least 2 identities");
  for (auto [label, count] : per_class)
    if (count < 2)
      throw std::invalid_argument("train_embedder: identity " + std::to_string(label) + " has only " +
                                  std::to_string(count) + " image");

  EmbedderTrainResult result{EmbedderModel::build(config, train.seed), {}};
  EmbedderModel& model = result.model;
  Rng rng(derive_seed(train.seed, 1));
  const auto batch = static_cast<std::size_t>(train.batch_size);

  // Batch-statistics loss over the whole set, leaving running stats as they were.
  auto evaluate = [&] {
    std::vector<tg::BatchNormState> saved;
    for (auto& b : model.blocks_) saved.push_back(b.bn);
    Rng order_rng(derive_seed(train.seed, 2));
    double total = 0.0;
    for (const auto& idx : minibatches(images.size(), batch, order_rng))
      total += batch_loss(model, images, labels, idx)->value[0] * static_cast<double>(idx.size());
    for (std::size_t i = 0; i < saved.size(); ++i) model.blocks_[i].bn = saved[i];
    return total / static_cast<double>(images.size());
  };

  result.loss_history.push_back(evaluate());
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    for (const auto& idx : minibatches(images.size(), batch, rng)) {
      if (idx.size() < 2) continue;
      tg::Var loss = batch_loss(model, images, labels, idx);
      tg::backward(loss);
      tg::adam_step(model.params_, train.lr, 0.9, 0.999, 1e-8);
    }
    result.loss_history.push_back(evaluate());
  }
  return result;
}

std::vector<Embedding> embed_images(const EmbedderModel& model, std::span<const Image> images,
                                    std::span<const std::string> identities, SourceTag source,
                                    bool resize) {
  if (images.size() != identities.size())
    throw std::invalid_argument("embed_images: " + std::to_string(images.size()) + " images but " +
                                std::to_string(identities.size()) + " identity labels");
  const auto s = static_cast<std::size_t>(model.config().input_size);
  std::vector<Embedding> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (identities[i].empty())
      throw std::invalid_argument("embed_images: image " + std::to_string(i) + " has no identity label");
    const Image& img = images[i];
    std::vector<double> v;
    if (img.height() != s || img.width() != s) {
      if (!resize)
        throw std::invalid_argument("embed_images: image " + std::to_string(i) + " is " +
                                    img.shape_string() + ", embedder expects " + std::to_string(s) +
                                    "x" + std::to_string(s));
      v = model.embed(resize_to(img, s, s));
    } else {
      v = model.embed(img);
    }
    out.push_back({std::move(v), identities[i], source});
  }
  return out;
}

std::string encode_embedder(const EmbedderModel& model) {
  Container c;
  const EmbedderConfig& cfg = model.config();
  c.fields = {{"format", "EMB1"},
              {"embedding_dim", std::to_string(cfg.embedding_dim)},
              {"classes", std::to_string(cfg.classes)},
              {"base_channels", std::to_string(cfg.base_channels)},
              {"image_channels", std::to_string(cfg.image_channels)},
              {"input_size", std::to_string(cfg.input_size)},
              {"step", std::to_string(model.params().step())}};
  c.tensors = model.state_tensors();
  return encode_container(kMagic, c);
}

EmbedderModel decode_embedder(const std::string& bytes) {
  const Container c = decode_container(kMagic, bytes);
  EmbedderConfig cfg;
  cfg.embedding_dim = static_cast<int>(c.int_field("embedding_dim"));
  cfg.classes = static_cast<int>(c.int_field("classes"));
  cfg.base_channels = static_cast<int>(c.int_field("base_channels"));
  cfg.image_channels = static_cast<int>(c.int_field("image_channels"));
  cfg.input_size = static_cast<int>(c.int_field("input_size"));
  EmbedderModel m = EmbedderModel::build(cfg, 0);
  const std::size_t expected = m.state_tensors().size();
  if (c.tensors.size() != expected)
    throw std::runtime_error("embedder file holds " + std::to_string(c.tensors.size()) +
                             " tensors, config implies " + std::to_string(expected));
  m.load_state(c);
  m.params().set_step(c.int_field("step"));
  return m;
}

void save_embedder(const EmbedderModel& model, const std::filesystem::path& path) {
  const std::string bytes = encode_embedder(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

EmbedderModel load_embedder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_embedder(ss.str());
}

}  // namespace wmark
