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
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gradcases.hpp"
#include "wmark/container.hpp"
#include "wmark/synthetic.hpp"
#include "wmark/transforms.hpp"
#include "wmark/watermarknet.hpp"

using namespace wmark;
namespace fs = std::filesystem;

namespace {

WatermarkConfig small_config(int l = 8) {
  WatermarkConfig c;
  c.message_length = l;
  c.base_channels = 8;
  c.encoder_blocks = 2;
  c.decoder_blocks = 2;
  return c;
}

Image noise_image(std::uint64_t seed, std::size_t c, std::size_t h, std::size_t w) {
  Rng rng(seed);
  Image img(c, h, w);
  for (double& v : img.pixels()) v = rng.uniform();
  return img;
}

// A few steps of joint training so batch-norm statistics and weights move.
void train_briefly(WatermarkModel& m, int steps, std::uint64_t seed) {
  const auto imgs = synth::textures(seed, 8, 3, 16, 16);
  Rng rng(seed);
  const int l = static_cast<int>(m.message_length());
  for (int s = 0; s < steps; ++s) {
    std::vector<Message> msgs;
    for (int i = 0; i < 8; ++i) msgs.push_back(random_message(rng.next_u64(), l));
    auto x = tg::constant(images_to_tensor(imgs));
    const Tensor mt = messages_to_tensor(msgs);
    auto iw = m.encode(x, mt, tg::Mode::kTrain);
    auto loss = tg::add(tg::mse_loss(iw, x), tg::bce_logits_loss(m.decode(iw, tg::Mode::kTrain), mt));
    tg::backward(loss);
    tg::adam_step(m.encoder_params(), 1e-3, 0.9, 0.999, 1e-8);
    tg::adam_step(m.decoder_params(), 1e-3, 0.9, 0.999, 1e-8);
  }
}

}  // namespace

TEST_CASE("config validation") {
  WatermarkConfig c;
  CHECK_NOTHROW(c.validate());
  c.message_length = 0;
  CHECK_THROWS(c.validate());
  CHECK_THROWS(WatermarkModel::build(c, 1));
  c.message_length = 257;
  CHECK_THROWS(c.validate());
  c = WatermarkConfig{};
  c.image_channels = 2;
  CHECK_THROWS(c.validate());
  c = WatermarkConfig{};
  c.decoder_blocks = -1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("architecture shapes follow the config") {
  WatermarkConfig c;
  c.message_length = 48;
  const auto m = WatermarkModel::build(c, 3);
  CHECK(m.decoder_params().get("dec.linear.weight")->value.shape() == Shape{48, 48});
  CHECK(m.decoder_params().get("dec.linear.bias")->value.shape() == Shape{48});
  CHECK(m.encoder_params().get("enc.final.weight")->value.shape() == Shape{3, 64 + 3 + 48, 3, 3});

  std::size_t enc_convs = 0, dec_convs = 0;
  for (const auto& e : m.encoder_params().entries())
    if (e.param->value.rank() == 4) ++enc_convs;
  for (const auto& e : m.decoder_params().entries())
    if (e.param->value.rank() == 4) ++dec_convs;
  CHECK(enc_convs == 4 + 1);
  CHECK(dec_convs == 7 + 1);
  for (const auto& e : m.encoder_params().entries())
    if (e.name.ends_with(".bias") || e.name.ends_with(".beta"))
      for (double v : e.param->value.data()) CHECK(v == 0.0);
}

TEST_CASE("same seed gives the same parameters") {
  const auto a = WatermarkModel::build(small_config(), 9);
  const auto b = WatermarkModel::build(small_config(), 9);
  const auto c = WatermarkModel::build(small_config(), 10);
  const auto sa = a.state_tensors(), sb = b.state_tensors(), sc = c.state_tensors();
  REQUIRE(sa.size() == sb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].name == sb[i].name);
    CHECK(sa[i].value == sb[i].value);
    any_diff = any_diff || !(sa[i].value == sc[i].value);
  }
  CHECK(any_diff);
}

TEST_CASE("encode preserves shape and range") {
  WatermarkConfig c;
  c.message_length = 48;
  c.base_channels = 4;
  const auto m = WatermarkModel::build(c, 4);
  const Image img = noise_image(1, 3, 112, 112);
  const Message msg = random_message(2, 48);
  const Image out = m.encode(img, msg);
  CHECK(out.same_shape(img));
  for (double v : out.pixels()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(m.encode(img, msg) == out);

  const auto small = WatermarkModel::build(small_config(), 5);
  for (auto [h, w] : {std::pair{8, 8}, {9, 17}, {31, 12}}) {
    const Image in = noise_image(h * 100 + w, 3, h, w);
    CHECK(small.encode(in, random_message(h, 8)).same_shape(in));
  }
  CHECK_THROWS(small.encode(img, random_message(2, 16)));
  CHECK_THROWS(small.encode(noise_image(3, 1, 16, 16), random_message(2, 8)));
}

TEST_CASE("decoder accepts every sweep output size") {
  WatermarkConfig c;
  c.message_length = 48;
  c.base_channels = 4;
  c.decoder_blocks = 2;
  const auto m = WatermarkModel::build(c, 6);
  const Image img = noise_image(7, 3, 112, 112);
  for (double r : {1.0, 0.95, 0.9, 0.85, 0.8, 0.75}) {
    for (const Image& t : {crop_random(img, r, 3), resize_bilinear(img, r)}) {
      CAPTURE(t.shape_string());
      const auto logits = m.decode_logits(t);
      CHECK(logits.size() == 48);
      for (double v : logits) CHECK(std::isfinite(v));
    }
  }
  CHECK(m.decode_logits(crop_random(img, 0.8, 1)).size() == 48);
  CHECK_THROWS(m.decode_logits(noise_image(8, 3, 7, 20)));
  CHECK_THROWS(m.decode_logits(noise_image(8, 1, 16, 16)));
}

TEST_CASE("extract is deterministic and total") {
  const auto m = WatermarkModel::build(small_config(), 11);
  const Image img = noise_image(12, 3, 20, 20);
  const Message a = m.extract(img), b = m.extract(img);
  CHECK(a == b);
  CHECK(a.size() == 8);
  CHECK(m.decode_logits(img) == m.decode_logits(img));
}

TEST_CASE("untrained decoder is at chance") {
  const auto m = WatermarkModel::build(small_config(16), 13);
  double acc = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Image img = synth::texture(100 + i, 3, 16, 16);
    const Message msg = random_message(500 + i, 16);
    acc += bit_accuracy(random_message(900 + i, 16), m.extract(m.encode(img, msg)));
  }
  acc /= 200.0;
  CHECK(acc >= 0.4);
  CHECK(acc <= 0.6);
}

TEST_CASE("composite loss passes the finite-difference check") {
  auto c = testing::make_composite_case(21);
  tg::GradCheckOptions opt;
  opt.max_entries_per_tensor = 12;
  opt.seed = 4;
  const auto rep = tg::finite_diff_check(c.build, c.inputs, opt);
  for (const auto& r : rep.results) {
    CAPTURE(r.name);
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("every message bit reaches the logits after training") {
  auto m = WatermarkModel::build(small_config(), 31);
  train_briefly(m, 5, 32);
  const Image img = synth::texture(33, 3, 16, 16);
  Rng rng(34);
  for (int t = 0; t < 10; ++t) {
    const Message msg = random_message(rng.next_u64(), 8);
    std::vector<std::uint8_t> flipped(msg.bits().begin(), msg.bits().end());
    const std::size_t bit = rng.below(8);
    flipped[bit] ^= 1;
    const auto a = m.decode_logits(m.encode(img, msg));
    const auto b = m.decode_logits(m.encode(img, Message(flipped)));
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    CAPTURE(bit);
    CHECK(diff > 0.0);
  }
}

TEST_CASE("infer mode reads running statistics") {
  auto m = WatermarkModel::build(small_config(), 41);
  train_briefly(m, 3, 42);
  const Image img = synth::texture(43, 3, 16, 16);
  const auto infer = m.decode_logits(img);
  CHECK(m.decode_logits(img) == infer);
  const auto train = m.decode_logits(img, tg::Mode::kTrain);
  bool differs = false;
  for (std::size_t i = 0; i < infer.size(); ++i) differs = differs || infer[i] != train[i];
  CHECK(differs);
  // The train-mode pass folded this batch into the running statistics.
  CHECK(m.decode_logits(img) != infer);
}

TEST_SUITE("weight file") {
  TEST_CASE("round trip keeps config, step, stats and outputs") {
    auto m = WatermarkModel::build(small_config(), 51);
    train_briefly(m, 3, 52);
    const auto path = fs::temp_directory_path() / "wmark_test_model.wmf";
    save_model(m, path);
    const auto loaded = load_model(path);
    fs::remove(path);
    CHECK(loaded.config() == m.config());
    CHECK(loaded.step() == m.step());
    CHECK(loaded.step() == 3);

    const auto a = m.state_tensors(), b = loaded.state_tensors();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(round_to_f32(a[i].value) == b[i].value);
    }

    // Persisted values are binary32, so a second trip is exact.
    const auto again = decode_model(encode_model(loaded));
    CHECK(encode_model(again) == encode_model(loaded));
    const Image img = synth::texture(53, 3, 16, 16);
    const Message msg = random_message(54, 8);
    const Image wa = loaded.encode(img, msg), wb = again.encode(img, msg);
    CHECK(wa == wb);
    CHECK(loaded.decode_logits(wa) == again.decode_logits(wb));

    const Image wo = m.encode(img, msg);
    for (std::size_t i = 0; i < wo.size(); ++i) CHECK(std::abs(wo.pixels()[i] - wa.pixels()[i]) < 1e-5);
  }

  TEST_CASE("layout") {
    const auto m = WatermarkModel::build(small_config(), 61);
    const std::string bytes = encode_model(m);
    REQUIRE(bytes.size() > 8);
    CHECK(bytes.substr(0, 4) == "WMF1");
    const std::uint32_t hlen = static_cast<unsigned char>(bytes[4]) |
                               (static_cast<unsigned char>(bytes[5]) << 8) |
                               (static_cast<unsigned char>(bytes[6]) << 16) |
                               (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[7])) << 24);
    const std::string header = bytes.substr(8, hlen);
    CHECK(header.find("message_length=8") != std::string::npos);
    CHECK(header.find("tensor dec.linear.weight 8 8") != std::string::npos);
    std::size_t scalars = 0;
    for (const auto& t : m.state_tensors()) scalars += t.value.size();
    CHECK(bytes.size() == 8 + hlen + 4 * scalars);
  }

  TEST_CASE("corruption is rejected with a reason") {
    const auto m = WatermarkModel::build(small_config(), 71);
    std::string bytes = encode_model(m);
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH(decode_model(bad), doctest::Contains("magic"));
    CHECK_THROWS_WITH(decode_model(bytes.substr(0, bytes.size() - 3)), doctest::Contains("truncat"));
    CHECK_THROWS(decode_model(bytes.substr(0, 6)));
    CHECK_THROWS(decode_model(bytes + "xxxx"));
    CHECK_THROWS(load_model(fs::temp_directory_path() / "wmark_no_such_model.wmf"));
  }

  TEST_CASE("a model for one length rejects another") {
    WatermarkConfig c = small_config(48);
    const auto m = decode_model(encode_model(WatermarkModel::build(c, 81)));
    CHECK_THROWS(m.encode(synth::texture(1, 3, 16, 16), random_message(1, 16)));
  }
}
