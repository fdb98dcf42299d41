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
#include "wmark/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wmark {

const std::string& Container::field(std::string_view key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return v;
  throw std::runtime_error("weight file is missing header field '" + std::string(key) + "'");
}

long long Container::int_field(std::string_view key) const {
  const std::string& v = field(key);
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty())
    throw std::runtime_error("header field '" + std::string(key) + "' is not an integer: '" + v + "'");
  return out;
}

const Tensor& Container::tensor(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw std::runtime_error("weight file has no tensor '" + std::string(name) + "'");
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_container(std::string_view magic, const Container& c) {
  if (magic.size() != 4) throw std::invalid_argument("container magic must be 4 bytes");
  std::string header;
  for (const auto& [k, v] : c.fields) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("header field '" + k + "' contains a reserved character");
    header += k + "=" + v + "\n";
  }
  for (const auto& t : c.tensors) {
    if (t.name.find_first_of(" \n") != std::string::npos)
      throw std::invalid_argument("tensor name '" + t.name + "' contains whitespace");
    header += "tensor " + t.name;
    for (std::size_t d : t.value.shape()) header += " " + std::to_string(d);
    header += "\n";
  }
  std::string out(magic);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const auto& t : c.tensors) {
    for (double v : t.value.data()) {
      const auto f = static_cast<float>(v);
      put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

Container decode_container(std::string_view magic, const std::string& bytes) {
  if (bytes.size() < 8) throw std::runtime_error("weight file truncated: shorter than 8-byte preamble");
  if (std::string_view(bytes).substr(0, 4) != magic)
    throw std::runtime_error("weight file magic mismatch: expected '" + std::string(magic) + "'");
  const std::uint32_t hlen = get_u32(bytes, 4);
  if (8 + static_cast<std::size_t>(hlen) > bytes.size())
    throw std::runtime_error("weight file truncated inside header (" + std::to_string(hlen) + " bytes declared)");
  std::istringstream hs(bytes.substr(8, hlen));
  Container c;
  std::vector<Shape> shapes;
  std::string line;
  while (std::getline(hs, line)) {
    if (line.empty()) continue;
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ls(line.substr(7));
      std::string name;
      ls >> name;
      Shape shape;
      long long d;
      while (ls >> d) {
        if (d <= 0) throw std::runtime_error("tensor '" + name + "' has non-positive dimension");
        shape.push_back(static_cast<std::size_t>(d));
      }
      if (name.empty() || shape.empty() || !ls.eof())
        throw std::runtime_error("malformed tensor manifest line: '" + line + "'");
      c.tensors.push_back({name, Tensor()});
      shapes.push_back(std::move(shape));
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("malformed header line: '" + line + "'");
      c.fields.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }
  std::size_t at = 8 + hlen;
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    const std::size_t n = shape_numel(shapes[i]);
    if (at + 4 * n > bytes.size())
      throw std::runtime_error("weight file truncated in tensor '" + c.tensors[i].name + "'");
    std::vector<double> data(n);
    for (std::size_t j = 0; j < n; ++j, at += 4)
      data[j] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
    c.tensors[i].value = Tensor(shapes[i], std::move(data));
    c.tensors[i].value.require_finite("tensor " + c.tensors[i].name);
  }
  if (at != bytes.size())
    throw std::runtime_error("weight file has " + std::to_string(bytes.size() - at) + " trailing bytes");
  return c;
}

void write_container(const std::filesystem::path& path, std::string_view magic, const Container& c) {
  const std::string bytes = encode_container(magic, c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Container read_container(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_container(magic, ss.str());
}

Tensor round_to_f32(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace wmark
