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
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "wmark/augment.hpp"
#include "wmark/optim.hpp"
#include "wmark/pipeline.hpp"
#include "wmark/rng.hpp"

namespace wmark {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be a finite value >= 0");
  if (!(recon_weight >= 0.0) || !std::isfinite(recon_weight))
    throw std::invalid_argument("recon_weight must be a finite value >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2 for batch normalisation");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (image_size < static_cast<int>(kMinDecodeExtent))
    throw std::invalid_argument("image_size must be >= " + std::to_string(kMinDecodeExtent));
  if (!(p_aug >= 0.0 && p_aug <= 1.0)) throw std::invalid_argument("p_aug must lie in [0, 1]");
  if (p_aug > 0.0 && aug_kinds.empty()) throw std::invalid_argument("p_aug > 0 but no augmentation kinds");
  if (checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be >= 0");
  model.validate();
  for (TransformKind k : aug_kinds) {
    if (k == TransformKind::kIdentity) throw std::invalid_argument("identity is not an augmentation kind");
    const FactorRange& r = range(k);
    if (!(r.lo <= r.hi))
      throw std::invalid_argument(std::string(kind_name(k)) + " range has lo > hi");
    Transform{k, r.lo, 0}.validate();
    Transform{k, r.hi, 0}.validate();
    if (k == TransformKind::kJpeg && (r.lo != std::floor(r.lo) || r.hi != std::floor(r.hi)))
      throw std::invalid_argument("jpeg range must hold integer qualities");
    if (k == TransformKind::kCrop || k == TransformKind::kResize) {
      const auto smallest = static_cast<double>(image_size) * r.lo;
      if (smallest < static_cast<double>(kMinDecodeExtent))
        throw std::invalid_argument(std::string(kind_name(k)) + " range shrinks images below the decoder minimum");
    }
  }
}

const FactorRange& TrainConfig::range(TransformKind kind) const {
  switch (kind) {
    case TransformKind::kCrop: return crop;
    case TransformKind::kResize: return resize;
    case TransformKind::kBrightness: return brightness;
    case TransformKind::kContrast: return contrast;
    case TransformKind::kJpeg: return jpeg;
    case TransformKind::kIdentity: break;
  }
  throw std::invalid_argument("identity has no factor range");
}

const std::set<std::string, std::less<>>& train_config_keys() {
  static const std::set<std::string, std::less<>> keys{
      "lambda", "recon_weight", "lr", "beta1", "beta2", "eps", "batch_size", "steps", "image_size",
      "message_length", "base_channels", "encoder_blocks", "decoder_blocks", "image_channels",
      "p_aug", "aug_kinds", "crop_range", "resize_range", "brightness_range", "contrast_range",
      "jpeg_range", "seed", "checkpoint_interval", "checkpoint_prefix"};
  return keys;
}

namespace {

FactorRange range_from(const KeyValueConfig& kv, std::string_view key, FactorRange fallback) {
  const std::vector<double> v = kv.get_list(key, {fallback.lo, fallback.hi});
  if (v.size() != 2) throw ConfigError(kv.origin() + ": key '" + std::string(key) + "' expects 'lo, hi'");
  return {v[0], v[1]};
}

int to_int(const KeyValueConfig& kv, std::string_view key, int fallback) {
  const long long v = kv.get_int(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(kv.origin() + ": key '" + std::string(key) + "' out of range");
  return static_cast<int>(v);
}

}  // namespace

TrainConfig train_config_from(const KeyValueConfig& kv) {
  TrainConfig c;
  c.lambda = kv.get_double("lambda", c.lambda);
  c.recon_weight = kv.get_double("recon_weight", c.recon_weight);
  c.lr = kv.get_double("lr", c.lr);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.eps = kv.get_double("eps", c.eps);
  c.batch_size = to_int(kv, "batch_size", c.batch_size);
  c.steps = to_int(kv, "steps", c.steps);
  c.image_size = to_int(kv, "image_size", c.image_size);
  c.model.message_length = to_int(kv, "message_length", c.model.message_length);
  c.model.base_channels = to_int(kv, "base_channels", c.model.base_channels);
  c.model.encoder_blocks = to_int(kv, "encoder_blocks", c.model.encoder_blocks);
  c.model.decoder_blocks = to_int(kv, "decoder_blocks", c.model.decoder_blocks);
  c.model.image_channels = to_int(kv, "image_channels", c.model.image_channels);
  c.p_aug = kv.get_double("p_aug", c.p_aug);
  if (kv.has("aug_kinds")) {
    c.aug_kinds.clear();
    std::string_view rest = kv.get_string("aug_kinds", "");
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      if (!item.empty()) {
        try {
          c.aug_kinds.push_back(parse_kind(item));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(kv.origin() + ": aug_kinds: " + e.what());
        }
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  c.crop = range_from(kv, "crop_range", c.crop);
  c.resize = range_from(kv, "resize_range", c.resize);
  c.brightness = range_from(kv, "brightness_range", c.brightness);
  c.contrast = range_from(kv, "contrast_range", c.contrast);
  c.jpeg = range_from(kv, "jpeg_range", c.jpeg);
  c.seed = kv.get_u64("seed", c.seed);
  c.checkpoint_interval = to_int(kv, "checkpoint_interval", c.checkpoint_interval);
  c.checkpoint_prefix = kv.get_string("checkpoint_prefix", "");
  return c;
}

TrainResult train_watermark(const TrainConfig& config, std::span<const Image> images,
                            const std::function<void(const HistoryRow&)>& on_step) {
  config.validate();
  if (images.empty()) throw std::invalid_argument("train_watermark: empty image set");
  const auto side = static_cast<std::size_t>(config.image_size);
  const auto channels = static_cast<std::size_t>(config.model.image_channels);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& im = images[i];
    if (im.channels() != channels || im.height() != side || im.width() != side)
      throw std::invalid_argument("train_watermark: image " + std::to_string(i) + " is " + im.shape_string() +
                                  ", config expects " + std::to_string(channels) + "x" + std::to_string(side) +
                                  "x" + std::to_string(side));
  }

  TrainResult result{WatermarkModel::build(config.model, derive_seed(config.seed, 0)), {}};
  WatermarkModel& model = result.model;
  Rng rng(derive_seed(config.seed, 1));
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t l = model.message_length();

  for (int step = 0; step < config.steps; ++step) {
    std::vector<Image> imgs;
    std::vector<Message> msgs;
    imgs.reserve(batch);
    msgs.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      imgs.push_back(images[rng.below(images.size())]);
      msgs.push_back(random_message(rng.next_u64(), static_cast<int>(l)));
    }

    HistoryRow row;
    row.step = step;
    if (config.p_aug > 0.0 && rng.uniform() < config.p_aug) {
      row.augment = config.aug_kinds[rng.below(config.aug_kinds.size())];
      const FactorRange& r = config.range(row.augment);
      if (row.augment == TransformKind::kJpeg)
        row.factor = r.lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(r.hi - r.lo) + 1));
      else
        row.factor = rng.uniform(r.lo, r.hi);
    }
    std::vector<std::uint64_t> crop_seeds(batch);
    for (auto& s : crop_seeds) s = rng.next_u64();

    try {
      const tg::Var x = tg::constant(images_to_tensor(imgs));
      const Tensor targets = messages_to_tensor(msgs);
      const tg::Var iw = model.encode(x, targets, tg::Mode::kTrain);
      tg::Var noised = iw;
      if (row.augment != TransformKind::kIdentity)
        noised = transform_batch(iw, row.augment, row.factor, crop_seeds);
      const tg::Var logits = model.decode(noised, tg::Mode::kTrain);
      const tg::Var recon = tg::mse_loss(iw, x);
      const tg::Var decode = tg::bce_logits_loss(logits, targets);
      const tg::Var total =
          tg::add(tg::scale(recon, config.recon_weight), tg::scale(decode, config.lambda));
      tg::backward(total);
      tg::adam_step(model.encoder_params(), config.lr, config.beta1, config.beta2, config.eps);
      tg::adam_step(model.decoder_params(), config.lr, config.beta1, config.beta2, config.eps);

      row.recon_loss = recon->value[0];
      row.decode_loss = decode->value[0];
      row.total_loss = total->value[0];
      std::size_t hits = 0;
      for (std::size_t i = 0; i < targets.size(); ++i)
        hits += (logits->value[i] > 0.0) == (targets[i] > 0.5);
      row.bit_acc = static_cast<double>(hits) / static_cast<double>(targets.size());
      row.psnr = row.recon_loss > 0.0 ? 10.0 * std::log10(1.0 / row.recon_loss)
                                      : std::numeric_limits<double>::infinity();
    } catch (const NumericError& e) {
      throw NumericError("training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    result.history.push_back(row);
    if (on_step) on_step(row);
    if (config.checkpoint_interval > 0 && !config.checkpoint_prefix.empty() &&
        (step + 1) % config.checkpoint_interval == 0) {
      save_model(model, config.checkpoint_prefix.string() + "-step" + std::to_string(step + 1) + ".wmf");
    }
  }
  return result;
}

std::string format_history_csv(std::span<const HistoryRow> rows) {
  std::string out = "step,recon_loss,decode_loss,total_loss,bit_acc,psnr,augment,factor\n";
  for (const HistoryRow& r : rows) {
    out += std::to_string(r.step) + ',' + format_number(r.recon_loss) + ',' + format_number(r.decode_loss) +
           ',' + format_number(r.total_loss) + ',' + format_number(r.bit_acc) + ',' + format_number(r.psnr) +
           ',' + std::string(kind_name(r.augment)) + ',' + format_number(r.factor) + '\n';
  }
  return out;
}

}  // namespace wmark
