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
#include "wmark/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace wmark {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  cfg.origin_ = std::string(origin);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    const std::string where = cfg.origin_ + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (cfg.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool KeyValueConfig::has(std::string_view key) const { return find(key) != nullptr; }

void KeyValueConfig::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

const std::string* KeyValueConfig::find(std::string_view key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string_view fallback) const {
  const std::string* v = find(key);
  return v ? *v : std::string(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  double out = 0.0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size())
    throw ConfigError(origin_ + ": key '" + std::string(key) + "' expects a number, got '" + *v + "'");
  return out;
}

long long KeyValueConfig::get_int(std::string_view key, long long fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  long long out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size())
    throw ConfigError(origin_ + ": key '" + std::string(key) + "' expects an integer, got '" + *v + "'");
  return out;
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size())
    throw ConfigError(origin_ + ": key '" + std::string(key) + "' expects an unsigned integer, got '" + *v + "'");
  return out;
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(origin_ + ": key '" + std::string(key) + "' expects true/false, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_list(std::string_view key, const std::vector<double>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::string_view rest = *v;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    double x = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size())
      throw ConfigError(origin_ + ": key '" + std::string(key) + "' expects a comma-separated list of numbers");
    out.push_back(x);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string, std::less<>>& known) const {
  for (const auto& [k, v] : values_)
    if (!known.count(k)) throw ConfigError(origin_ + ": unknown key '" + k + "'");
}

}  // namespace wmark
