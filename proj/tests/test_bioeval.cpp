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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "wmark/bioeval.hpp"
#include "wmark/embedder.hpp"
#include "wmark/rng.hpp"
#include "wmark/synthetic.hpp"
#include "stat_refs.hpp"
#include "tar_oracle.hpp"

using namespace wmark;
namespace fs = std::filesystem;
using testing::brute_tar;
using testing::kTail;

namespace {

struct BetaRef {
  double a, b, x, v;
};

const BetaRef kBeta[] = {
    {0.5, 0.5, 0.3, 0.36901011956554538},  {2, 3, 0.4, 0.5248},
    {10, 0.5, 0.99, 0.65792817515678433},  {0.5, 10, 0.01, 0.34207182484321553},
    {50, 60, 0.45, 0.46423529143060363},   {3, 0.5, 1e-08, 3.1250000117187503e-25},
    {1, 1, 0.25, 0.25},                    {200, 0.5, 0.999, 0.52724410702523517},
};

struct WelchRef {
  std::vector<double> a, b;
  double t, df, p;
};

// scipy.stats.ttest_ind(a, b, equal_var=False).
const WelchRef kWelch[] = {
    {{0.299, -0.274, -0.891, -0.455, -0.992, 0.06, 1.34, -0.492},
     {0.49, 1.045, 0.978, 0.853, 0.335, 0.785},
     -3.196158846647809, 9.378859445912438, 0.010345815057644809},
    {{-2.688, -0.915, -3.802, -2.579, -3.683, -0.47},
     {-1.101, 1.207, 1.035, 0.52, -2.975},
     -2.1507981582512823, 7.56784291233564, 0.06562559317549589},
    {{-0.146, 0.34, -4.59, -1.433, -2.936, -2.427, 3.183},
     {-1.219, 0.719, 3.011, -0.659, 0.521, 1.076, 0.959, -2.263},
     -1.2627418015205485, 9.95336672306938, 0.23546260621955364},
    {{5.435, -6.189, 3.438, 0.477, -2.566, 8.002},
     {3.468, -3.398, 1.061, 2.818, 0.139, 3.19},
     0.09175770201789014, 7.320416252524271, 0.9293513075299997},
};

ScoreSet scores(std::vector<double> g, std::vector<double> i) {
  ScoreSet s;
  s.genuine = std::move(g);
  s.imposter = std::move(i);
  return s;
}

Embedding emb(std::string id, SourceTag tag, std::vector<double> v) {
  return Embedding{std::move(v), std::move(id), tag};
}

std::vector<Embedding> random_embeddings(Rng& rng, std::size_t ids, std::size_t per, std::size_t d,
                                         bool both_tags) {
  std::vector<Embedding> out;
  for (std::size_t i = 0; i < ids; ++i) {
    std::vector<double> centre(d);
    for (double& c : centre) c = rng.normal();
    for (std::size_t k = 0; k < per; ++k) {
      std::vector<double> v(d), w(d);
      for (std::size_t j = 0; j < d; ++j) {
        v[j] = centre[j] + 0.5 * rng.normal();
        w[j] = v[j] + 0.05 * rng.normal();
      }
      out.push_back(emb("id" + std::to_string(i), SourceTag::kOriginal, v));
      if (both_tags) out.push_back(emb("id" + std::to_string(i), SourceTag::kWatermarked, w));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("similarity") {
  TEST_CASE("cosine examples") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine_similarity(a, b) == doctest::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0))).epsilon(1e-15));
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.97463).epsilon(1e-5));
    CHECK_THROWS(cosine_similarity(a, std::vector<double>{0, 0, 0}));
    CHECK_THROWS(cosine_similarity(a, std::vector<double>{1, 2}));
    CHECK_THROWS(cosine_similarity(a, std::vector<double>{1, std::nan(""), 2}));
  }

  TEST_CASE("cosine properties") {
    Rng rng(1);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> a(7), b(7);
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = rng.normal();
      const double s = cosine_similarity(a, b);
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
      CHECK(s == cosine_similarity(b, a));
      std::vector<double> scaled = a;
      const double k = rng.uniform(0.01, 100.0);
      for (auto& v : scaled) v *= k;
      CHECK(cosine_similarity(scaled, b) == doctest::Approx(s).epsilon(1e-12));
    }
    std::vector<double> x{1e-3, 1e-3, 1e-3};
    CHECK(cosine_similarity(x, x) <= 1.0);
  }

  TEST_CASE("match rule") {
    CHECK(match_decision(0.5, 0.5) == Decision::kMatch);
    CHECK(match_decision(0.5 - 1e-9, 0.5) == Decision::kNonMatch);
    for (double s : {-1.0, -0.3, 0.0, 1.0}) CHECK(match_decision(s, -1.0) == Decision::kMatch);
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
      const double s = rng.uniform(-1, 1), tau = rng.uniform(-1, 1), d = rng.uniform(0, 0.5);
      if (match_decision(s, tau) == Decision::kMatch) {
        CHECK(match_decision(s + d, tau) == Decision::kMatch);
        CHECK(match_decision(s, tau - d) == Decision::kMatch);
      }
    }
  }
}

TEST_SUITE("pairing") {
  TEST_CASE("2 identities x 2 images") {
    const std::vector<Embedding> e = {emb("a", SourceTag::kOriginal, {1, 0}),
                                      emb("a", SourceTag::kOriginal, {1, 0.1}),
                                      emb("b", SourceTag::kOriginal, {0, 1}),
                                      emb("b", SourceTag::kOriginal, {0.1, 1})};
    const ScoreSet s = pair_scores(e, PairingMode::kOriginalOriginal);
    CHECK(s.genuine.size() == 2);
    CHECK(s.imposter.size() == 4);
    CHECK(s.skipped_identities == 0);
  }

  TEST_CASE("watermarked-original uses watermarked probes and original references") {
    // Originals point along x, watermarked copies along y; any cross-tag pair scores 0.
    std::vector<Embedding> e;
    for (std::string id : {"a", "b", "c"})
      for (int k = 0; k < 3; ++k) {
        e.push_back(emb(id, SourceTag::kOriginal, {1, 0, 0.01 * k}));
        e.push_back(emb(id, SourceTag::kWatermarked, {0, 1, 0.01 * k}));
      }
    const ScoreSet wo = pair_scores(e, PairingMode::kWatermarkedOriginal);
    CHECK(wo.genuine.size() == 3 * 3 * 2);
    CHECK(wo.imposter.size() == 3 * 2 * 3 * 3);
    for (double v : wo.genuine) CHECK(std::abs(v) < 1e-3);
    for (double v : wo.imposter) CHECK(std::abs(v) < 1e-3);

    const ScoreSet oo = pair_scores(e, PairingMode::kOriginalOriginal);
    const ScoreSet ww = pair_scores(e, PairingMode::kWatermarkedWatermarked);
    CHECK(oo.genuine.size() == 3 * 3);
    CHECK(oo.imposter.size() == 3 * 3 * 3);
    CHECK(ww.genuine.size() == oo.genuine.size());
    for (double v : oo.genuine) CHECK(v > 0.99);
    for (double v : ww.genuine) CHECK(v > 0.99);
  }

  TEST_CASE("short identities are skipped and counted") {
    std::vector<Embedding> e = {emb("a", SourceTag::kOriginal, {1, 0}), emb("a", SourceTag::kOriginal, {1, 1}),
                                emb("b", SourceTag::kOriginal, {0, 1}), emb("c", SourceTag::kOriginal, {1, 2})};
    const ScoreSet s = pair_scores(e, PairingMode::kOriginalOriginal);
    CHECK(s.genuine.size() == 1);
    CHECK(s.skipped_identities == 2);
    CHECK_THROWS(pair_scores(std::vector<Embedding>{e[0], e[1]}, PairingMode::kOriginalOriginal));
    CHECK_THROWS(pair_scores(std::vector<Embedding>{e[0], e[2]}, PairingMode::kOriginalOriginal));
    CHECK_THROWS(pair_scores(e, PairingMode::kWatermarkedWatermarked));
  }

  TEST_CASE("imposter subsampling is seeded and without replacement") {
    Rng rng(3);
    const auto e = random_embeddings(rng, 20, 3, 6, false);
    PairingOptions opt;
    opt.max_imposters = 100;
    opt.seed = 9;
    const ScoreSet a = pair_scores(e, PairingMode::kOriginalOriginal, opt);
    const ScoreSet b = pair_scores(e, PairingMode::kOriginalOriginal, opt);
    CHECK(a.imposter.size() == 100);
    CHECK(a.imposter == b.imposter);
    opt.seed = 10;
    CHECK(pair_scores(e, PairingMode::kOriginalOriginal, opt).imposter != a.imposter);
    CHECK(std::set<double>(a.imposter.begin(), a.imposter.end()).size() == 100);
    const ScoreSet all = pair_scores(e, PairingMode::kOriginalOriginal);
    CHECK(all.imposter.size() == 20 * 19 / 2 * 9);
  }

  TEST_CASE("pairs_per_id caps genuine pairs") {
    Rng rng(4);
    const auto e = random_embeddings(rng, 5, 6, 4, false);
    PairingOptions opt;
    opt.pairs_per_id = 4;
    CHECK(pair_scores(e, PairingMode::kOriginalOriginal, opt).genuine.size() == 5 * 4);
    CHECK(pair_scores(e, PairingMode::kOriginalOriginal).genuine.size() == 5 * 15);
  }
}

TEST_SUITE("thresholds") {
  TEST_CASE("tar_at_far example") {
    const auto r = tar_at_far(scores({0.9, 0.85, 0.7, 0.6}, {0.8, 0.3, 0.2, 0.1}), 0.25);
    CHECK(r.tau == 0.8);
    CHECK(r.tar == 0.5);
    CHECK(r.achieved_far == 0.25);
  }

  TEST_CASE("separable sets reach full TAR") {
    const auto r = tar_at_far(scores({0.9, 0.95, 0.91}, {0.1, 0.2, 0.3, 0.4, 0.5}), 1.0 / 5.0);
    CHECK(r.tar == 1.0);
  }

  TEST_CASE("too few imposters") {
    std::vector<double> imp(100);
    for (std::size_t i = 0; i < imp.size(); ++i) imp[i] = i / 100.0;
    CHECK_THROWS_AS(tar_at_far(scores({0.5}, imp), 0.0001), InsufficientSamples);
    CHECK_THROWS_WITH(tar_at_far(scores({0.5}, imp), 0.0001), doctest::Contains("10000"));
    CHECK_NOTHROW(tar_at_far(scores({0.5}, imp), 0.01));
    CHECK_THROWS(tar_at_far(scores({0.5}, imp), 0.0));
    CHECK_THROWS(tar_at_far(scores({0.5}, imp), 1.5));
  }

  TEST_CASE("ties at the top use the sentinel") {
    const auto r = tar_at_far(scores({0.9, 0.7}, {0.8, 0.8, 0.8, 0.1}), 0.25);
    CHECK(r.tau > 0.8);
    CHECK(r.tau == std::nextafter(0.8, 2.0));
    CHECK(r.achieved_far == 0.0);
    CHECK(r.tar == 0.5);
  }

  TEST_CASE("matches the brute-force oracle on 1000 random sets") {
    Rng rng(5);
    int compared = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t ng = 1 + rng.below(50), ni = 1 + rng.below(50);
      ScoreSet s;
      // Coarse grid so that ties are common.
      for (std::size_t i = 0; i < ng; ++i) s.genuine.push_back(std::round(rng.uniform(-1, 1) * 20) / 20);
      for (std::size_t i = 0; i < ni; ++i) s.imposter.push_back(std::round(rng.uniform(-1, 1) * 20) / 20);
      const double far = rng.uniform(1.0 / ni, 1.0);
      const auto oracle = brute_tar(s, far);
      const auto got = tar_at_far(s, far);
      CAPTURE(t);
      if (oracle) {
        CHECK(got.tau == oracle->tau);
        CHECK(got.tar == oracle->tar);
        CHECK(got.achieved_far == oracle->achieved_far);
        ++compared;
      } else {
        CHECK(got.achieved_far == 0.0);
        CHECK(got.tau > *std::max_element(s.imposter.begin(), s.imposter.end()));
      }
    }
    CHECK(compared > 900);
  }

  TEST_CASE("TAR is monotone in the FAR target") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
      ScoreSet s;
      for (int i = 0; i < 40; ++i) s.genuine.push_back(rng.uniform(-0.2, 1.0));
      for (int i = 0; i < 300; ++i) s.imposter.push_back(rng.uniform(-1.0, 0.6));
      double prev = -1.0;
      for (double far : {0.005, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0}) {
        const double tar = tar_at_far(s, far).tar;
        CHECK(tar >= prev);
        prev = tar;
      }
    }
  }

  TEST_CASE("eer examples") {
    CHECK(eer(scores({0.9, 0.8}, {0.1, 0.2})) == 0.0);
    CHECK(eer(scores({0.9, 0.4}, {0.6, 0.1})) == doctest::Approx(0.25).epsilon(1e-12));
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> v(1 + rng.below(30));
      for (double& x : v) x = std::round(rng.uniform(-1, 1) * 10) / 10;
      std::vector<double> w = v;
      std::reverse(w.begin(), w.end());
      CHECK(std::abs(eer(scores(v, w)) - 0.5) <= 1e-9);
    }
    CHECK_THROWS(eer(scores({}, {0.1})));
    CHECK_THROWS(eer(scores({0.1}, {})));
  }

  TEST_CASE("eer stays in [0, 0.5] and is exact for separated gaps") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
      ScoreSet s;
      for (std::size_t i = 0; i < 1 + rng.below(20); ++i) s.genuine.push_back(rng.uniform(-1, 1));
      for (std::size_t i = 0; i < 1 + rng.below(20); ++i) s.imposter.push_back(rng.uniform(-1, 1));
      const double e = eer(s);
      CHECK(e >= 0.0);
      CHECK(e <= 0.5 + 1e-12);
    }
  }
}

TEST_SUITE("welch") {
  TEST_CASE("reference example") {
    const std::vector<double> a{1, 2, 3, 4}, b{2, 3, 4, 5};
    const auto r = welch_t_test(a, b);
    CHECK(r.t == doctest::Approx(-1.0954451150103321).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.3153335962012296).epsilon(1e-10));
    CHECK(std::abs(r.t + 1.0954) < 1e-4);
    CHECK(std::abs(r.p - 0.3150) < 1e-3);
  }

  TEST_CASE("identical samples") {
    const std::vector<double> a{0.3, 0.5, 0.1, 0.9};
    const auto r = welch_t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
  }

  TEST_CASE("scipy reference cases") {
    for (const auto& c : kWelch) {
      const auto r = welch_t_test(c.a, c.b);
      CHECK(r.t == doctest::Approx(c.t).epsilon(1e-12));
      CHECK(r.df == doctest::Approx(c.df).epsilon(1e-12));
      CHECK(r.p == doctest::Approx(c.p).epsilon(1e-9));
    }
  }

  TEST_CASE("affine invariance") {
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> a(2 + rng.below(10)), b(2 + rng.below(10));
      for (double& v : a) v = rng.normal();
      for (double& v : b) v = 0.5 + 2 * rng.normal();
      const double alpha = rng.uniform(0.1, 10), beta = rng.uniform(-5, 5);
      std::vector<double> a2 = a, b2 = b;
      for (double& v : a2) v = alpha * v + beta;
      for (double& v : b2) v = alpha * v + beta;
      const auto r1 = welch_t_test(a, b), r2 = welch_t_test(a2, b2);
      CHECK(std::abs(r1.p - r2.p) <= 1e-10);
      CHECK(r1.t == doctest::Approx(r2.t).epsilon(1e-9));
    }
    const std::vector<double> a{1, 2, 3, 4}, b{2, 3, 4, 5};
    std::vector<double> a10, b10;
    for (double v : a) a10.push_back(10 * v);
    for (double v : b) b10.push_back(10 * v);
    CHECK(welch_t_test(a10, b10).t == doctest::Approx(welch_t_test(a, b).t).epsilon(1e-14));
    CHECK(welch_t_test(a10, b10).p == doctest::Approx(welch_t_test(a, b).p).epsilon(1e-12));
  }

  TEST_CASE("degenerate inputs") {
    CHECK_THROWS(welch_t_test(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(welch_t_test(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0}));
    const auto r = welch_t_test(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 3.0});
    CHECK(std::isfinite(r.p));
  }

  TEST_CASE("tail probabilities hold relative accuracy deep into the tail") {
    for (const auto& c : kTail) {
      CAPTURE(c.t);
      CAPTURE(c.df);
      const double p = student_t_two_sided(c.t, c.df);
      CHECK(std::abs(p - c.p) <= 1e-9 * c.p);
      CHECK(std::abs(student_t_two_sided(-c.t, c.df) - p) == 0.0);
    }
    // Below the double range the result underflows cleanly.
    const double tiny = student_t_two_sided(1000.0, 200);
    CHECK(tiny >= 0.0);
    CHECK(tiny < 1e-300);
    CHECK(student_t_two_sided(std::numeric_limits<double>::infinity(), 5) == 0.0);
  }

  TEST_CASE("incomplete beta") {
    for (const auto& c : kBeta) {
      CAPTURE(c.a);
      CAPTURE(c.b);
      CAPTURE(c.x);
      CHECK(std::abs(incomplete_beta(c.a, c.b, c.x) - c.v) <= 1e-11 * c.v);
    }
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    CHECK_THROWS(incomplete_beta(2, 3, 1.5));
    CHECK_THROWS(incomplete_beta(0, 3, 0.5));
  }
}

TEST_SUITE("histogram") {
  TEST_CASE("bins and edges") {
    const std::vector<double> v{0.25, 0.75};
    const auto h = score_histogram(v, 2, 0.0, 1.0);
    CHECK(h.counts == std::vector<std::size_t>{1, 1});
    CHECK(h.edges == std::vector<double>{0.0, 0.5, 1.0});
    const std::vector<double> top{1.0, 0.5, 0.0};
    const auto h2 = score_histogram(top, 2, 0.0, 1.0);
    CHECK(h2.counts == std::vector<std::size_t>{1, 2});
    CHECK_THROWS(score_histogram(v, 0, 0.0, 1.0));
    CHECK_THROWS(score_histogram(v, 2, 1.0, 1.0));
  }

  TEST_CASE("conservation") {
    Rng rng(10);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> v(rng.below(60));
      for (double& x : v) x = rng.uniform(-1.5, 1.5);
      const auto h = score_histogram(v, 1 + rng.below(12), -1.0, 1.0);
      std::size_t total = h.underflow + h.overflow;
      for (auto c : h.counts) total += c;
      CHECK(total == v.size());
    }
  }
}

TEST_SUITE("reports") {
  TEST_CASE("summaries") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
    CHECK(s.count == 4);
    CHECK(summarize(std::vector<double>{7.0}).std == 0.0);
  }

  TEST_CASE("make_report fills every field") {
    Rng rng(11);
    const auto e = random_embeddings(rng, 12, 4, 8, true);
    const ScoreSet base = pair_scores(e, PairingMode::kOriginalOriginal);
    const ScoreSet wo = pair_scores(e, PairingMode::kWatermarkedOriginal);
    const auto r = make_report(wo, 0.01, &base);
    CHECK(r.error.empty());
    CHECK(r.tar >= 0.0);
    CHECK(r.tar <= 1.0);
    CHECK(r.achieved_far <= 0.01);
    REQUIRE(r.ttest.has_value());
    CHECK(r.ttest->p > 0.0);
    CHECK(r.ttest->p <= 1.0);
    REQUIRE(r.mean_shift.has_value());
    CHECK(*r.mean_shift == doctest::Approx(r.genuine.mean - summarize(base.genuine).mean));
    CHECK(r.genuine.count == wo.genuine.size());

    const auto bad = make_report(scores({0.5, 0.6}, {0.1, 0.2}), 0.01);
    CHECK(!bad.error.empty());
    CHECK(bad.eer == 0.0);
  }
}

TEST_SUITE("embeddings") {
  TEST_CASE("file round trip") {
    std::vector<Embedding> e = {emb("alice", SourceTag::kOriginal, {0.1, -2.5e-7, 3.141592653589793}),
                                emb("bob", SourceTag::kWatermarked, {1e10, -1.0, 0.333333333333})};
    const std::string text = format_embeddings(e);
    CHECK(text.starts_with("alice,original,0.1 -2.5e-07 3.14159265\n"));
    const auto back = parse_embeddings(text);
    REQUIRE(back.size() == 2);
    CHECK(back[1].identity == "bob");
    CHECK(back[1].source == SourceTag::kWatermarked);
    CHECK(format_embeddings(back) == text);

    const auto path = fs::temp_directory_path() / "wmark_test_emb.txt";
    save_embeddings(back, path);
    CHECK(load_embeddings(path) == back);
    fs::remove(path);

    CHECK_THROWS(parse_embeddings(",original,1 2\n"));
    CHECK_THROWS(parse_embeddings("a,other,1 2\n"));
    CHECK_THROWS(parse_embeddings("a,original,1 x\n"));
    CHECK_THROWS(parse_embeddings("a,original,1 2\nb,original,1\n"));
    CHECK(parse_embeddings("# comment\n\na,original,1 2\n").size() == 1);
  }
}

TEST_SUITE("embedder") {
  TEST_CASE("zero epochs is deterministic per seed") {
    const auto set = synth::identities(1, 4, 3, 3, 16, 16);
    EmbedderConfig cfg;
    cfg.classes = 4;
    cfg.embedding_dim = 8;
    cfg.base_channels = 4;
    cfg.input_size = 16;
    EmbedderTrainConfig tc;
    tc.epochs = 0;
    tc.seed = 5;
    const auto a = train_embedder(set.images, set.labels, cfg, tc);
    const auto b = train_embedder(set.images, set.labels, cfg, tc);
    CHECK(a.model.embed(set.images[0]) == b.model.embed(set.images[0]));
    CHECK(a.model.embed(set.images[0]).size() == 8);
    CHECK(a.loss_history.size() == 1);
  }

  TEST_CASE("training reduces the loss on a separable set") {
    const auto set = synth::identities(2, 4, 6, 3, 16, 16);
    EmbedderConfig cfg;
    cfg.classes = 4;
    cfg.embedding_dim = 8;
    cfg.base_channels = 8;
    cfg.input_size = 16;
    EmbedderTrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 8;
    tc.lr = 3e-3;
    tc.seed = 6;
    const auto r = train_embedder(set.images, set.labels, cfg, tc);
    REQUIRE(r.loss_history.size() == 31);
    CHECK(r.loss_history.front() == doctest::Approx(std::log(4.0)).epsilon(0.3));
    CHECK(r.loss_history.back() <= 0.5 * r.loss_history.front());

    const auto again = train_embedder(set.images, set.labels, cfg, tc);
    CHECK(encode_embedder(again.model) == encode_embedder(r.model));

    std::vector<std::string> ids;
    for (auto l : set.labels) ids.push_back("p" + std::to_string(l));
    const auto e1 = embed_images(r.model, set.images, ids, SourceTag::kOriginal);
    const auto e2 = embed_images(r.model, set.images, ids, SourceTag::kOriginal);
    CHECK(e1 == e2);
    CHECK(e1[5].identity == ids[5]);
  }

  TEST_CASE("preconditions") {
    const auto set = synth::identities(3, 2, 2, 3, 16, 16);
    EmbedderConfig cfg;
    cfg.input_size = 16;
    cfg.base_channels = 4;
    EmbedderTrainConfig tc;
    tc.epochs = 1;
    const std::vector<std::size_t> one_class(set.labels.size(), 0);
    CHECK_THROWS(train_embedder(set.images, one_class, cfg, tc));
    std::vector<std::size_t> bad = set.labels;
    bad[0] = 7;
    CHECK_THROWS(train_embedder(set.images, bad, cfg, tc));
    cfg.classes = 1;
    CHECK_THROWS(train_embedder(set.images, set.labels, cfg, tc));

    EmbedderConfig ok;
    ok.input_size = 16;
    ok.base_channels = 4;
    const auto m = train_embedder(set.images, set.labels, ok, tc).model;
    const std::vector<std::string> ids(set.images.size(), "x");
    const std::vector<Image> big = {synth::texture(1, 3, 24, 24)};
    CHECK_THROWS(embed_images(m, big, std::span(ids).first(1), SourceTag::kOriginal));
    CHECK(embed_images(m, big, std::span(ids).first(1), SourceTag::kOriginal, true).size() == 1);
    const std::vector<std::string> missing = {""};
    CHECK_THROWS(embed_images(m, big, missing, SourceTag::kOriginal, true));
  }

  TEST_CASE("EMB1 round trip") {
    const auto set = synth::identities(4, 3, 2, 3, 16, 16);
    EmbedderConfig cfg;
    cfg.classes = 3;
    cfg.input_size = 16;
    cfg.base_channels = 4;
    EmbedderTrainConfig tc;
    tc.epochs = 2;
    const auto m = train_embedder(set.images, set.labels, cfg, tc).model;
    const std::string bytes = encode_embedder(m);
    CHECK(bytes.substr(0, 4) == "EMB1");
    const auto back = decode_embedder(bytes);
    CHECK(back.config() == m.config());
    CHECK(encode_embedder(back) == bytes);
    const auto twice = decode_embedder(encode_embedder(back));
    CHECK(twice.embed(set.images[1]) == back.embed(set.images[1]));
    std::string bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS(decode_embedder(bad));
    CHECK_THROWS(decode_embedder("WMF1" + bytes.substr(4)));
  }
}
