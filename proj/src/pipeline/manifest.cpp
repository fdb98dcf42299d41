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
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wmark/pipeline.hpp"

namespace wmark {

std::filesystem::path DatasetManifest::resolve(std::size_t i) const {
  const std::filesystem::path& p = entries.at(i).path;
  return p.is_absolute() ? p : root / p;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_data && (line == "path,identity" || line == "path,identity,source")) {
      seen_data = true;
      continue;
    }
    seen_data = true;
    auto fail = [&](const std::string& why) {
      return std::runtime_error("manifest line " + std::to_string(line_no) + ": " + why);
    };
    const std::size_t c1 = line.find(',');
    if (c1 == std::string_view::npos) throw fail("expected path,identity");
    const std::size_t c2 = line.find(',', c1 + 1);
    ManifestEntry e;
    e.path = std::filesystem::path(std::string(line.substr(0, c1)));
    e.identity = std::string(line.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1));
    if (e.path.empty()) throw fail("empty path");
    if (e.identity.empty()) throw fail("empty identity label");
    if (c2 != std::string_view::npos) {
      try {
        e.source = parse_tag(line.substr(c2 + 1));
      } catch (const std::invalid_argument& ex) {
        throw fail(ex.what());
      }
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  DatasetManifest m = parse_manifest(ss.str(), path.parent_path());
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (!std::filesystem::exists(m.resolve(i)))
      throw std::runtime_error("manifest " + path.string() + ": missing file " + m.resolve(i).string());
  return m;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "# path,identity,source\n";
  for (const ManifestEntry& e : manifest.entries) {
    const std::string p = e.path.generic_string();
    if (p.find_first_of(",\n") != std::string::npos || e.identity.find_first_of(",\n") != std::string::npos)
      throw std::invalid_argument("manifest fields may not contain commas or newlines: " + p);
    out += p + ',' + e.identity;
    if (e.source) out += ',' + std::string(tag_name(*e.source));
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string text = format_manifest(manifest);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

LoadedImages load_images(const DatasetManifest& manifest) {
  LoadedImages out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    try {
      out.images.push_back(load_pnm(manifest.resolve(i)));
      out.identities.push_back(manifest.entries[i].identity);
    } catch (const std::exception& e) {
      out.failures.push_back(manifest.resolve(i).string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace wmark
