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
#include <optional>

#include "wmark/pipeline.hpp"

namespace wmark {

std::vector<VerificationReport> run_verification(std::span<const Embedding> embeddings,
                                                 const VerificationSpec& spec) {
  if (spec.modes.empty() || spec.fars.empty())
    throw std::invalid_argument("run_verification: need at least one mode and one FAR target");
  if (!embeddings.empty()) {
    const std::size_t d = embeddings.front().values.size();
    for (const Embedding& e : embeddings)
      if (e.values.size() != d)
        throw std::invalid_argument("run_verification: embeddings disagree on dimension");
  }
  std::optional<ScoreSet> baseline;
  std::string baseline_error;
  if (spec.baseline) {
    try {
      baseline = pair_scores(embeddings, PairingMode::kOriginalOriginal, spec.pairing);
    } catch (const std::exception& e) {
      baseline_error = std::string("baseline unavailable: ") + e.what();
    }
  }

  std::vector<VerificationReport> reports;
  for (PairingMode mode : spec.modes) {
    std::optional<ScoreSet> scores;
    std::string error;
    try {
      scores = pair_scores(embeddings, mode, spec.pairing);
    } catch (const std::exception& e) {
      error = e.what();
    }
    for (double far : spec.fars) {
      VerificationReport r;
      if (scores) {
        r = make_report(*scores, far, baseline ? &*baseline : nullptr);
        if (r.error.empty() && spec.baseline && !baseline) r.error = baseline_error;
      } else {
        r.mode = mode;
        r.far_target = far;
        r.error = error;
      }
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

std::string format_reports(std::span<const VerificationReport> reports) {
  std::string out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const VerificationReport& r = reports[i];
    if (i) out += '\n';
    auto line = [&](std::string_view key, const std::string& value) {
      out += key;
      out += ": ";
      out += value;
      out += '\n';
    };
    line("mode", std::string(mode_name(r.mode)));
    line("far_target", format_number(r.far_target));
    if (!r.error.empty()) {
      line("error", r.error);
      continue;
    }
    line("tau", format_number(r.tau));
    line("achieved_far", format_number(r.achieved_far));
    line("tar", format_number(r.tar));
    line("eer", format_number(r.eer));
    line("genuine_mean", format_number(r.genuine.mean));
    line("genuine_std", format_number(r.genuine.std));
    line("genuine_count", std::to_string(r.genuine.count));
    line("imposter_mean", format_number(r.imposter.mean));
    line("imposter_std", format_number(r.imposter.std));
    line("imposter_count", std::to_string(r.imposter.count));
    if (r.ttest) {
      line("ttest_t", format_number(r.ttest->t));
      line("ttest_df", format_number(r.ttest->df));
      line("ttest_p", format_number(r.ttest->p));
    }
    if (r.mean_shift) line("mean_shift", format_number(*r.mean_shift));
  }
  return out;
}

}  // namespace wmark
