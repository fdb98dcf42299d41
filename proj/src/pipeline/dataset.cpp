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
#include <optional>
#include <stdexcept>

#include "parallel.hpp"
#include "wmark/pipeline.hpp"

namespace wmark {

namespace {

std::filesystem::path output_relative(const DatasetManifest& manifest, std::size_t i, std::size_t channels) {
  std::filesystem::path rel = manifest.entries[i].path;
  if (rel.is_absolute()) {
    rel = rel.lexically_relative(manifest.root);
    if (rel.empty() || *rel.begin() == "..") rel = manifest.entries[i].path.filename();
  }
  rel = rel.lexically_normal();
  if (!rel.empty() && *rel.begin() == "..") throw std::runtime_error("path escapes the manifest root");
  rel.replace_extension(channels == 1 ? ".pgm" : ".ppm");
  return rel;
}

}  // namespace

DatasetResult watermark_dataset(const WatermarkModel& model, const DatasetManifest& manifest,
                                const Message& msg, const std::filesystem::path& out_dir) {
  if (msg.size() != model.message_length())
    throw std::invalid_argument("watermark_dataset: message has " + std::to_string(msg.size()) +
                                " bits, model expects " + std::to_string(model.message_length()));
  std::filesystem::create_directories(out_dir);
  const std::size_t n = manifest.entries.size();
  struct Outcome {
    std::optional<std::filesystem::path> rel;
    double psnr = 0.0;
    std::string error;
  };
  std::vector<Outcome> outcomes(n);
  detail::parallel_for(n, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    try {
      const Image img = load_pnm(manifest.resolve(i));
      const Image wm = model.encode(img, msg);
      const std::filesystem::path rel = output_relative(manifest, i, img.channels());
      const std::filesystem::path dst = out_dir / rel;
      if (dst.has_parent_path()) std::filesystem::create_directories(dst.parent_path());
      save_pnm(wm, dst);
      o.psnr = psnr(img, load_pnm(dst));
      o.rel = rel;
    } catch (const std::exception& e) {
      o.error = manifest.resolve(i).string() + ": " + e.what();
    }
  });

  DatasetResult result;
  result.manifest.root = out_dir;
  double psnr_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!outcomes[i].rel) {
      result.failures.push_back(outcomes[i].error);
      continue;
    }
    result.manifest.entries.push_back({*outcomes[i].rel, manifest.entries[i].identity, SourceTag::kWatermarked});
    psnr_sum += outcomes[i].psnr;
  }
  if (result.failures.size() * 10 > n)
    throw std::runtime_error("watermark_dataset: " + std::to_string(result.failures.size()) + " of " +
                             std::to_string(n) + " images failed (limit 10%); first: " + result.failures.front());
  if (!result.manifest.entries.empty())
    result.mean_psnr = psnr_sum / static_cast<double>(result.manifest.entries.size());
  return result;
}

}  // namespace wmark
