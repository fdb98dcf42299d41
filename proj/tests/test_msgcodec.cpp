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

#include <filesystem>
#include <limits>

#include "wmark/msgcodec.hpp"
#include "wmark/rng.hpp"

using namespace wmark;

namespace {

Message bits(std::initializer_list<int> v) {
  std::vector<std::uint8_t> b;
  for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
  return Message(std::move(b));
}

}  // namespace

TEST_CASE("random_message is deterministic and fair") {
  CHECK(random_message(42, 48) == random_message(42, 48));
  CHECK(random_message(42, 48).size() == 48);
  CHECK(random_message(42, 48) != random_message(43, 48));
  CHECK_THROWS(random_message(1, 0));
  CHECK_THROWS(random_message(1, -3));

  double ones = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const Message m = random_message(s, 48);
    for (auto b : m.bits()) ones += b;
  }
  const double mean = ones / (10000.0 * 48.0);
  CHECK(mean >= 0.48);
  CHECK(mean <= 0.52);
}

TEST_CASE("random messages agree on half their bits") {
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s)
    acc += bit_accuracy(random_message(2 * s, 32), random_message(2 * s + 1, 32));
  CHECK(acc / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("Message rejects non-binary elements") {
  CHECK_THROWS_AS(Message(std::vector<std::uint8_t>{0, 2}), std::invalid_argument);
  CHECK(Message::parse("0110") == bits({0, 1, 1, 0}));
  CHECK(bits({1, 0, 1}).to_string() == "101");
  CHECK_THROWS(Message::parse("01x"));
}

TEST_CASE("bitmap to message is row-major") {
  SignatureBitmap b{2, 2, {1, 0, 0, 1}};
  CHECK(bitmap_to_message(b) == bits({1, 0, 0, 1}));
  SignatureBitmap z{3, 4, std::vector<std::uint8_t>(12, 0)};
  const Message zm = bitmap_to_message(z);
  for (auto v : zm.bits()) CHECK(v == 0);
  CHECK_THROWS(bitmap_to_message(SignatureBitmap{1, 2, {0, 3}}));
  CHECK_THROWS(bitmap_to_message(SignatureBitmap{2, 2, {0, 1, 1}}));
}

TEST_CASE("message to bitmap inverts") {
  CHECK(message_to_bitmap(bits({1, 0, 0, 1}), 2, 2) == SignatureBitmap{2, 2, {1, 0, 0, 1}});
  CHECK_THROWS(message_to_bitmap(random_message(1, 48), 7, 7));
  CHECK_THROWS(message_to_bitmap(random_message(1, 48), 7, 6));
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng.below(9), w = 1 + rng.below(9);
    SignatureBitmap b{h, w, {}};
    for (std::size_t i = 0; i < h * w; ++i) b.pixels.push_back(rng.bit() ? 1 : 0);
    CHECK(message_to_bitmap(bitmap_to_message(b), h, w) == b);
  }
}

TEST_CASE("bundled S glyph") {
  const SignatureBitmap g = s_glyph();
  CHECK(g.height == 8);
  CHECK(g.width == 6);
  const Message m = bitmap_to_message(g);
  CHECK(m.size() == 48);
  CHECK(message_to_bitmap(m, 8, 6) == g);
  CHECK(load_bitmap(std::filesystem::path(WMARK_ASSET_DIR) / "s_glyph.txt") == g);
}

TEST_CASE("bitmap text format") {
  SignatureBitmap b{2, 3, {1, 0, 1, 0, 1, 1}};
  CHECK(format_bitmap(b) == "2 3\n101\n011\n");
  CHECK(parse_bitmap(format_bitmap(b)) == b);
  CHECK_THROWS(parse_bitmap(""));
  CHECK_THROWS(parse_bitmap("2 3\n101\n"));
  CHECK_THROWS(parse_bitmap("2 3\n101\n01\n"));
  CHECK_THROWS(parse_bitmap("2 3\n101\n012\n"));
  CHECK_THROWS(parse_bitmap("0 3\n"));

  const auto path = std::filesystem::temp_directory_path() / "wmark_test_bitmap.txt";
  save_bitmap(s_glyph(), path);
  CHECK(load_bitmap(path) == s_glyph());
  std::filesystem::remove(path);
  CHECK_THROWS(load_bitmap(path));
}

TEST_CASE("logits to message") {
  const double a[] = {2.3, -0.5, 0.1};
  CHECK(logits_to_message(a) == bits({1, 0, 1}));
  const double z[] = {0.0, 0.0, -0.0};
  CHECK(logits_to_message(z) == bits({0, 0, 0}));
  const double big[] = {1000.0, -1000.0, 1e300, -1e300};
  CHECK(logits_to_message(big) == bits({1, 0, 1, 0}));
  const double bad[] = {1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS(logits_to_message(bad));

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> l(16), s(16);
    const double k = rng.uniform(1e-3, 1e3);
    for (std::size_t i = 0; i < 16; ++i) {
      l[i] = rng.uniform(-1.0, 1.0);
      s[i] = k * l[i];
    }
    CHECK(logits_to_message(l) == logits_to_message(s));
  }
}

TEST_CASE("bit accuracy") {
  const Message m = random_message(9, 48);
  CHECK(bit_accuracy(m, m) == 1.0);
  CHECK(bit_accuracy(bits({0, 1, 0, 1}), bits({0, 1, 1, 1})) == 0.75);
  CHECK(bit_accuracy(m, m.complement()) == 0.0);
  CHECK_THROWS(bit_accuracy(bits({0, 1}), bits({0, 1, 1})));
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Message a = random_message(s, 37), b = random_message(s + 1000, 37);
    CHECK(bit_accuracy(a, b) + bit_accuracy(a, b.complement()) == 1.0);
  }
}
