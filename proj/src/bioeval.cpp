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
#include "wmark/bioeval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "wmark/rng.hpp"

namespace wmark {

std::string_view tag_name(SourceTag tag) {
  return tag == SourceTag::kOriginal ? "original" : "watermarked";
}

SourceTag parse_tag(std::string_view text) {
  if (text == "original") return SourceTag::kOriginal;
  if (text == "watermarked") return SourceTag::kWatermarked;
  throw std::invalid_argument("unknown source tag '" + std::string(text) + "'");
}

std::string_view mode_name(PairingMode mode) {
  switch (mode) {
    case PairingMode::kOriginalOriginal: return "original-original";
    case PairingMode::kWatermarkedOriginal: return "watermarked-original";
    case PairingMode::kWatermarkedWatermarked: return "watermarked-watermarked";
  }
  return "?";
}

PairingMode parse_mode(std::string_view text) {
  for (PairingMode m : kAllModes)
    if (mode_name(m) == text) return m;
  throw std::invalid_argument("unknown pairing mode '" + std::string(text) + "'");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb))
    throw std::invalid_argument("cosine_similarity: non-finite embedding value");
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm embedding");
  const double s = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(s, -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(a.values, b.values);
}

Decision match_decision(double s, double tau) {
  return s >= tau ? Decision::kMatch : Decision::kNonMatch;
}

namespace {

struct Group {
  std::vector<std::size_t> original;
  std::vector<std::size_t> watermarked;
};

const std::vector<std::size_t>& probes(const Group& g, PairingMode mode) {
  return mode == PairingMode::kOriginalOriginal ? g.original : g.watermarked;
}
const std::vector<std::size_t>& references(const Group& g, PairingMode mode) {
  return mode == PairingMode::kWatermarkedWatermarked ? g.watermarked : g.original;
}

// k distinct values from [0, n), sorted (Floyd's algorithm).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(k * 2);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::size_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ScoreSet pair_scores(std::span<const Embedding> embeddings, PairingMode mode,
                     const PairingOptions& options) {
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const Embedding& e = embeddings[i];
    if (e.identity.empty()) throw std::invalid_argument("pair_scores: embedding " + std::to_string(i) + " has no identity");
    auto [it, fresh] = groups.try_emplace(e.identity);
    if (fresh) order.push_back(e.identity);
    (e.source == SourceTag::kOriginal ? it->second.original : it->second.watermarked).push_back(i);
  }
  if (order.size() < 2)
    throw std::invalid_argument("pair_scores: need at least 2 identities, got " + std::to_string(order.size()));

  auto score = [&](std::size_t p, std::size_t r) {
    return cosine_similarity(embeddings[p], embeddings[r]);
  };
  const bool symmetric = mode != PairingMode::kWatermarkedOriginal;

  ScoreSet out;
  out.mode = mode;
  for (const std::string& id : order) {
    const Group& g = groups[id];
    const auto& pr = probes(g, mode);
    const auto& rf = references(g, mode);
    std::size_t taken = 0;
    auto room = [&] { return options.pairs_per_id == 0 || taken < options.pairs_per_id; };
    for (std::size_t i = 0; i < pr.size() && room(); ++i) {
      for (std::size_t j = symmetric ? i + 1 : 0; j < rf.size() && room(); ++j) {
        if (!symmetric && i == j) continue;
        out.genuine.push_back(score(pr[i], rf[j]));
        ++taken;
      }
    }
    if (taken == 0) ++out.skipped_identities;
  }
  if (out.genuine.empty())
    throw std::invalid_argument(std::string("pair_scores: no identity has a genuine pair under ") +
                                std::string(mode_name(mode)));

  struct Block {
    const std::vector<std::size_t>* probe;
    const std::vector<std::size_t>* ref;
    std::size_t size;
  };
  std::vector<Block> blocks;
  std::size_t total = 0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = symmetric ? a + 1 : 0; b < order.size(); ++b) {
      if (a == b) continue;
      const auto& pr = probes(groups[order[a]], mode);
      const auto& rf = references(groups[order[b]], mode);
      if (pr.empty() || rf.empty()) continue;
      blocks.push_back({&pr, &rf, pr.size() * rf.size()});
      total += blocks.back().size;
    }
  }
  auto emit = [&](const Block& blk, std::size_t k) {
    const std::size_t n = blk.ref->size();
    out.imposter.push_back(score((*blk.probe)[k / n], (*blk.ref)[k % n]));
  };
  if (total <= options.max_imposters) {
    out.imposter.reserve(total);
    for (const Block& blk : blocks)
      for (std::size_t k = 0; k < blk.size; ++k) emit(blk, k);
  } else {
    Rng rng(options.seed);
    const std::vector<std::size_t> picks = sample_indices(total, options.max_imposters, rng);
    out.imposter.reserve(picks.size());
    std::size_t base = 0, bi = 0;
    for (std::size_t idx : picks) {
      while (idx >= base + blocks[bi].size) base += blocks[bi++].size;
      emit(blocks[bi], idx - base);
    }
  }
  return out;
}

TarResult tar_at_far(const ScoreSet& scores, double far) {
  if (!(far > 0.0 && far <= 1.0)) throw std::invalid_argument("tar_at_far: far must lie in (0, 1]");
  if (scores.genuine.empty()) throw std::invalid_argument("tar_at_far: no genuine scores");
  const std::size_t n_imp = scores.imposter.size();
  if (static_cast<double>(n_imp) * far < 1.0 - 1e-9) {
    const double need = std::ceil(1.0 / far - 1e-9);
    throw InsufficientSamples("FAR " + std::to_string(far) + " needs at least " +
                              std::to_string(static_cast<long long>(need)) +
                              " imposter scores, have " + std::to_string(n_imp));
  }
  std::vector<double> imp = scores.imposter;
  std::sort(imp.begin(), imp.end());
  TarResult r;
  r.tau = std::nextafter(imp.back(), std::numeric_limits<double>::infinity());
  r.achieved_far = 0.0;
  for (std::size_t i = 0; i < imp.size(); ++i) {
    if (i > 0 && imp[i] == imp[i - 1]) continue;
    const double f = static_cast<double>(n_imp - i) / static_cast<double>(n_imp);
    if (f <= far) {
      r.tau = imp[i];
      r.achieved_far = f;
      break;
    }
  }
  std::size_t hits = 0;
  for (double g : scores.genuine) hits += g >= r.tau;
  r.tar = static_cast<double>(hits) / static_cast<double>(scores.genuine.size());
  return r;
}

double eer(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.imposter.empty())
    throw std::invalid_argument("eer: genuine and imposter scores must be non-empty");
  std::vector<double> gen = scores.genuine, imp = scores.imposter;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> thr = gen;
  thr.insert(thr.end(), imp.begin(), imp.end());
  std::sort(thr.begin(), thr.end());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());

  const double ng = static_cast<double>(gen.size()), ni = static_cast<double>(imp.size());
  struct Pt { double x, y; };  // (FAR, FRR)
  std::vector<Pt> pts;
  pts.push_back({0.0, 1.0});  // threshold above every score
  for (auto it = thr.rbegin(); it != thr.rend(); ++it) {
    const double t = *it;
    const auto imp_ge = imp.end() - std::lower_bound(imp.begin(), imp.end(), t);
    const auto gen_lt = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    pts.push_back({static_cast<double>(imp_ge) / ni, static_cast<double>(gen_lt) / ng});
  }
  // Points now run from (0,1) to (1,0) with x non-decreasing; keep the lower hull.
  std::vector<Pt> hull;
  for (const Pt& p : pts) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull.back();
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross <= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double d = hull[i].y - hull[i].x;
    if (d == 0.0) return hull[i].x;
    if (d < 0.0) {
      const Pt& p = hull[i - 1];
      const Pt& q = hull[i];
      const double dp = p.y - p.x;
      const double alpha = dp / (dp - d);
      return p.x + alpha * (q.x - p.x);
    }
  }
  return hull.back().x;
}

Histogram score_histogram(std::span<const double> scores, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw std::invalid_argument("score_histogram: bins must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("score_histogram: need lo < hi");
  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(i == bins ? hi : lo + width * static_cast<double>(i));
  for (double v : scores) {
    if (std::isnan(v)) throw std::invalid_argument("score_histogram: NaN score");
    if (v < lo) { ++h.underflow; continue; }
    if (v > hi) { ++h.overflow; continue; }
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    while (idx > 0 && v < h.edges[idx]) --idx;
    while (idx + 1 < bins && v >= h.edges[idx + 1]) ++idx;
    ++h.counts[idx];
  }
  return h;
}

VerificationReport make_report(const ScoreSet& scores, double far, const ScoreSet* baseline) {
  VerificationReport r;
  r.mode = scores.mode;
  r.far_target = far;
  r.genuine = summarize(scores.genuine);
  r.imposter = summarize(scores.imposter);
  try {
    r.eer = eer(scores);
    const TarResult t = tar_at_far(scores, far);
    r.tar = t.tar;
    r.tau = t.tau;
    r.achieved_far = t.achieved_far;
    if (baseline != nullptr) {
      r.ttest = welch_t_test(baseline->genuine, scores.genuine);
      r.mean_shift = r.genuine.mean - summarize(baseline->genuine).mean;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string format_embeddings(std::span<const Embedding> embeddings) {
  std::string out;
  char buf[32];
  for (const Embedding& e : embeddings) {
    if (e.identity.empty() || e.identity.find_first_of(",\n\r") != std::string::npos)
      throw std::invalid_argument("embedding identity '" + e.identity + "' is empty or holds a comma/newline");
    out += e.identity;
    out += ',';
    out += tag_name(e.source);
    out += ',';
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      if (!std::isfinite(e.values[i])) throw std::invalid_argument("embedding value is not finite");
      std::snprintf(buf, sizeof buf, "%.9g", e.values[i]);
      if (i) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<Embedding> parse_embeddings(std::string_view text) {
  std::vector<Embedding> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      return std::runtime_error("embedding line " + std::to_string(line_no) + ": " + why);
    };
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw fail("expected identity,source_tag,values");
    Embedding e;
    e.identity = std::string(line.substr(0, c1));
    if (e.identity.empty()) throw fail("missing identity");
    try {
      e.source = parse_tag(line.substr(c1 + 1, c2 - c1 - 1));
    } catch (const std::invalid_argument& ex) {
      throw fail(ex.what());
    }
    const char* p = line.data() + c2 + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (q < end && *q != ' ')) throw fail("bad number");
      if (!std::isfinite(v)) throw fail("non-finite value");
      e.values.push_back(v);
      p = q;
    }
    if (e.values.empty()) throw fail("no values");
    if (!out.empty() && out.front().values.size() != e.values.size())
      throw fail("dimension " + std::to_string(e.values.size()) + " differs from " +
                 std::to_string(out.front().values.size()));
    out.push_back(std::move(e));
  }
  return out;
}

void save_embeddings(std::span<const Embedding> embeddings, const std::filesystem::path& path) {
  const std::string text = format_embeddings(embeddings);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<Embedding> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str());
}

}  // namespace wmark
