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
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmark/bioeval.hpp"
#include "wmark/config.hpp"
#include "wmark/image.hpp"
#include "wmark/msgcodec.hpp"
#include "wmark/transforms.hpp"
#include "wmark/watermarknet.hpp"

namespace wmark {

// ---- training ---------------------------------------------------------------

struct FactorRange {
  double lo = 1.0;
  double hi = 1.0;
};

struct TrainConfig {
  double lambda = 1.0;        // decode-loss weight
  double recon_weight = 1.0;  // reconstruction-loss weight
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 16;
  int steps = 2000;
  int image_size = 32;
  WatermarkConfig model{16, 16, 4, 7, 3};

  // With probability p_aug a batch gets one augmentation, the kind drawn
  // uniformly from aug_kinds and the factor uniformly from its range (JPEG
  // qualities are integers). Crop offsets are drawn per image.
  double p_aug = 0.5;
  std::vector<TransformKind> aug_kinds{TransformKind::kCrop, TransformKind::kResize,
                                       TransformKind::kJpeg};
  FactorRange crop{0.75, 1.0};
  FactorRange resize{0.75, 1.0};
  FactorRange brightness{1.0, 3.5};
  FactorRange contrast{1.0, 3.5};
  FactorRange jpeg{75.0, 100.0};

  std::uint64_t seed = 0;
  int checkpoint_interval = 0;             // steps; 0 disables
  std::filesystem::path checkpoint_prefix;  // "<prefix>-step<N>.wmf"

  void validate() const;
  const FactorRange& range(TransformKind kind) const;
};

// Recognised keys (see docs/config.md) applied over the defaults above.
TrainConfig train_config_from(const KeyValueConfig& kv);
const std::set<std::string, std::less<>>& train_config_keys();

struct HistoryRow {
  int step = 0;
  double recon_loss = 0.0;
  double decode_loss = 0.0;
  double total_loss = 0.0;
  double bit_acc = 0.0;  // training batch, after augmentation
  double psnr = 0.0;     // training batch, before augmentation
  TransformKind augment = TransformKind::kIdentity;
  double factor = 1.0;
};

struct TrainResult {
  WatermarkModel model;
  std::vector<HistoryRow> history;
};

// Joint encoder/decoder training: per step a batch (uniform with
// replacement), a fresh random message per image, encode, optional
// augmentation, decode, loss = recon_weight * mse + lambda * bce, Adam.
// `on_step` (optional) sees every history row.
TrainResult train_watermark(const TrainConfig& config, std::span<const Image> images,
                            const std::function<void(const HistoryRow&)>& on_step = {});

std::string format_history_csv(std::span<const HistoryRow> rows);

// ---- manifests --------------------------------------------------------------

struct ManifestEntry {
  std::filesystem::path path;  // as written; relative paths resolve against root
  std::string identity;
  std::optional<SourceTag> source;
};

// CSV "path,identity[,source_tag]" lines; '#' starts a comment line. An
// optional first line "path,identity[,source]" is treated as a header.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(std::size_t i) const;
};

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& root);
// Root is the manifest's directory; every listed file must exist.
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct LoadedImages {
  std::vector<Image> images;
  std::vector<std::string> identities;
  std::vector<std::string> failures;  // "path: reason"
};
// Reads every entry in order; unreadable files are recorded and skipped.
LoadedImages load_images(const DatasetManifest& manifest);

// ---- dataset watermarking ---------------------------------------------------

struct DatasetResult {
  DatasetManifest manifest;           // source tag watermarked, root = out_dir
  std::vector<std::string> failures;  // "path: reason"
  double mean_psnr = 0.0;             // original vs. the 8-bit file written
};

// Encodes every readable image with `msg` and writes PPMs under out_dir,
// mirroring each entry's path relative to the manifest root. Throws when
// more than 10% of the images fail.
DatasetResult watermark_dataset(const WatermarkModel& model, const DatasetManifest& manifest,
                                const Message& msg, const std::filesystem::path& out_dir);

// ---- robustness sweep ---------------------------------------------------------

struct SweepSpec {
  std::vector<std::pair<TransformKind, std::vector<double>>> grids;
  int repetitions = 1;
  std::uint64_t seed = 0;

  // identity {1}; crop/resize {1..0.75}; brightness/contrast {1..3.5};
  // jpeg {100..75}.
  static SweepSpec standard();
  void validate() const;
};

struct SweepRow {
  TransformKind kind = TransformKind::kIdentity;
  double factor = 1.0;
  double mean_bit_acc = 0.0;  // NaN when the cell failed
  double std = 0.0;           // population standard deviation
  std::size_t n = 0;
  std::string error;
};

// Embeds msg in every image, then per (kind, factor) cell applies the
// transform (repetitions x images, crop offsets seeded per image and
// repetition), extracts and averages bit accuracy.
std::vector<SweepRow> run_sweep(const WatermarkModel& model, std::span<const Image> images,
                                const Message& msg, const SweepSpec& spec);

inline constexpr std::string_view kSweepHeader = "kind,factor,mean_bit_acc,std,n";
std::string format_sweep_csv(std::span<const SweepRow> rows);

// ---- verification -------------------------------------------------------------

struct VerificationSpec {
  std::vector<PairingMode> modes{std::begin(kAllModes), std::end(kAllModes)};
  std::vector<double> fars{0.01};
  // Attach a Welch test of every report's genuine scores against the
  // original-original genuine scores.
  bool baseline = true;
  PairingOptions pairing;
};

// One report per (mode, far) in mode-major order. Failures are recorded in
// the report's error field.
std::vector<VerificationReport> run_verification(std::span<const Embedding> embeddings,
                                                 const VerificationSpec& spec);

// Blocks of "key: value" lines separated by blank lines.
std::string format_reports(std::span<const VerificationReport> reports);

// Shortest decimal that reads back to the same double ("nan", "inf" for
// non-finite values).
std::string format_number(double v);

}  // namespace wmark
