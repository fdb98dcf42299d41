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
#include <limits>
#include <stdexcept>
#include <string>

#include "wmark/bioeval.hpp"

namespace wmark {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxIter = 10000;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b), modified Lentz.
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kRelTol) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

double log_prefactor(double a, double b, double x, double one_minus_x) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
         b * std::log(one_minus_x);
}

// I_x(a,b) given both x and 1-x so callers can keep the small one exact.
double ibeta(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(log_prefactor(a, b, x, one_minus_x)) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(log_prefactor(a, b, x, one_minus_x)) * beta_cf(b, a, one_minus_x) / b;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x outside [0,1]");
  return ibeta(a, b, x, 1.0 - x);
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided: df must be positive");
  if (std::isnan(t)) throw std::invalid_argument("student_t_two_sided: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // p = I_{df/(df+t^2)}(df/2, 1/2), with 1-x = t^2/(df+t^2) formed directly.
  const double x = df / (df + t2);
  const double one_minus_x = t2 / (df + t2);
  const double p = ibeta(0.5 * df, 0.5, x, one_minus_x);
  return std::min(1.0, std::max(0.0, p));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: need at least two samples per side, got " +
                                std::to_string(a.size()) + " and " + std::to_string(b.size()));
  const SampleSummary sa = summarize(a);
  const SampleSummary sb = summarize(b);
  const double va = sa.std * sa.std / static_cast<double>(sa.count);
  const double vb = sb.std * sb.std / static_cast<double>(sb.count);
  if (va == 0.0 && vb == 0.0)
    throw std::invalid_argument("welch_t_test: both samples have zero variance");
  WelchResult r;
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(sa.count - 1) + vb * vb / static_cast<double>(sb.count - 1));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace wmark
