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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wmark {

enum class SourceTag { kOriginal, kWatermarked };
std::string_view tag_name(SourceTag tag);
SourceTag parse_tag(std::string_view text);

// Probe/reference source pairing.
enum class PairingMode { kOriginalOriginal, kWatermarkedOriginal, kWatermarkedWatermarked };
std::string_view mode_name(PairingMode mode);
PairingMode parse_mode(std::string_view text);
inline constexpr PairingMode kAllModes[] = {PairingMode::kOriginalOriginal,
                                            PairingMode::kWatermarkedOriginal,
                                            PairingMode::kWatermarkedWatermarked};

struct Embedding {
  std::vector<double> values;
  std::string identity;
  SourceTag source = SourceTag::kOriginal;

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

// dot(a,b) / (|a| |b|) clamped to [-1, 1]. Throws on a length mismatch, a
// zero-norm argument or a non-finite value.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Embedding& a, const Embedding& b);

enum class Decision { kNonMatch, kMatch };
// Match iff s >= tau.
Decision match_decision(double s, double tau);

struct ScoreSet {
  PairingMode mode = PairingMode::kOriginalOriginal;
  std::vector<double> genuine;
  std::vector<double> imposter;
  std::size_t skipped_identities = 0;  // too few images for a genuine pair
};

struct PairingOptions {
  // Cap on genuine pairs per identity, 0 for all of them.
  std::size_t pairs_per_id = 0;
  // Imposter pairs are all cross-identity pairs while their number is at
  // most this, otherwise a seeded uniform sample (without replacement) of
  // exactly this many.
  std::size_t max_imposters = 1'000'000;
  std::uint64_t seed = 0;
};

// Genuine and imposter cosine scores under a pairing mode.
//
// Within an identity, embeddings with the same source tag are numbered in
// list order; the k-th original and the k-th watermarked embedding are taken
// to come from the same photograph.
//   original-original        unordered pairs {i<j} of originals
//   watermarked-watermarked  unordered pairs {i<j} of watermarked copies
//   watermarked-original     ordered (watermarked i, original j), i != j
// Imposters use the same probe/reference tags across two identities
// (unordered pairs of identities for the symmetric modes).
ScoreSet pair_scores(std::span<const Embedding> embeddings, PairingMode mode,
                     const PairingOptions& options = {});

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TarResult {
  double tar = 0.0;
  double tau = 0.0;
  double achieved_far = 0.0;
};

// tau is the smallest distinct imposter score whose FAR (imposters >= tau)
// is <= far. If ties at the top imposter score make that impossible, tau is
// the next double above the largest imposter score and FAR is 0.
// Throws InsufficientSamples when imposter count * far < 1.
TarResult tar_at_far(const ScoreSet& scores, double far);

// Equal error rate from the convex hull of the (FAR, FRR) operating points
// at every threshold in the union of scores, with a threshold above all
// scores as the end point. The hull crosses FAR == FRR on one segment; the
// crossing is found by linear interpolation along it.
double eer(const ScoreSet& scores);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};
// Throws std::invalid_argument for fewer than two samples on either side or
// when both samples have zero variance.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by Lentz continued fractions.
double incomplete_beta(double a, double b, double x);
// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

struct Histogram {
  std::vector<std::size_t> counts;
  std::vector<double> edges;  // counts.size() + 1
  std::size_t underflow = 0;
  std::size_t overflow = 0;
};
// Equal-width bins over [lo, hi]; each bin is right-open except the last.
Histogram score_histogram(std::span<const double> scores, std::size_t bins, double lo, double hi);

struct SampleSummary {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator, 0 for a single sample
  std::size_t count = 0;
};
SampleSummary summarize(std::span<const double> values);

struct VerificationReport {
  PairingMode mode = PairingMode::kOriginalOriginal;
  double far_target = 0.0;
  double tau = 0.0;
  double achieved_far = 0.0;
  double tar = 0.0;
  double eer = 0.0;
  SampleSummary genuine;
  SampleSummary imposter;
  std::optional<WelchResult> ttest;   // against the baseline genuine scores
  std::optional<double> mean_shift;   // genuine mean minus baseline genuine mean
  std::string error;                  // non-empty when the report could not be computed
};

// Fills one report; a failed threshold lookup is recorded in `error`.
VerificationReport make_report(const ScoreSet& scores, double far,
                               const ScoreSet* baseline = nullptr);

// Embedding text file: one "identity,source_tag,v1 v2 ... vd" record per
// line, values printed with 9 significant digits. Blank lines and lines
// starting with '#' are skipped when parsing.
std::string format_embeddings(std::span<const Embedding> embeddings);
std::vector<Embedding> parse_embeddings(std::string_view text);
void save_embeddings(std::span<const Embedding> embeddings, const std::filesystem::path& path);
std::vector<Embedding> load_embeddings(const std::filesystem::path& path);

}  // namespace wmark
