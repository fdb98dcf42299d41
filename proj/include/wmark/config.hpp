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
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wmark {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain-text "key = value" settings. Blank lines and lines starting with '#'
// are ignored; whitespace around keys and values is trimmed; a repeated key
// is an error.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  void set(std::string key, std::string value);

  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  // Comma-separated reals, e.g. "1, 0.95, 0.9".
  std::vector<double> get_list(std::string_view key, const std::vector<double>& fallback) const;

  // Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string, std::less<>>& known) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  const std::string* find(std::string_view key) const;
  std::string origin_ = "<config>";
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace wmark
