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
// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// CPUID check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels_internal.hpp"

namespace wmark::kernels::avx2 {
namespace {

constexpr std::size_t kKc = 288;  // k-panel depth
constexpr std::size_t kNc = 768;  // n-panel width, multiple of kNr
constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 12;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Packs B[kc x nc] into kNr-wide strips, each stored [p][kNr]; the last strip
// is zero-padded.
void pack_b(std::size_t kc, std::size_t nc, const double* b, std::size_t ldb, double* out) {
  for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
    const std::size_t w = std::min(kNr, nc - j0);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* src = b + p * ldb + j0;
      std::size_t j = 0;
      for (; j < w; ++j) out[j] = src[j];
      for (; j < kNr; ++j) out[j] = 0.0;
      out += kNr;
    }
  }
}

// Packs A[mr x kc] (mr <= kMr) as [p][kMr], zero rows past mr.
void pack_a(std::size_t mr, std::size_t kc, const double* a, std::size_t lda, double* out) {
  for (std::size_t p = 0; p < kc; ++p) {
    std::size_t r = 0;
    for (; r < mr; ++r) out[r] = a[r * lda + p];
    for (; r < kMr; ++r) out[r] = 0.0;
    out += kMr;
  }
}

// acc[4 x 12] = C tile; acc += sum_p a[p][:] * b[p][:], increasing p.
inline void micro_nn(std::size_t kc, const double* a, const double* b, double* c,
                     std::size_t ldc) {
  __m256d c00 = _mm256_loadu_pd(c), c01 = _mm256_loadu_pd(c + 4), c02 = _mm256_loadu_pd(c + 8);
  double* c1 = c + ldc;
  __m256d c10 = _mm256_loadu_pd(c1), c11 = _mm256_loadu_pd(c1 + 4), c12 = _mm256_loadu_pd(c1 + 8);
  double* c2 = c1 + ldc;
  __m256d c20 = _mm256_loadu_pd(c2), c21 = _mm256_loadu_pd(c2 + 4), c22 = _mm256_loadu_pd(c2 + 8);
  double* c3 = c2 + ldc;
  __m256d c30 = _mm256_loadu_pd(c3), c31 = _mm256_loadu_pd(c3 + 4), c32 = _mm256_loadu_pd(c3 + 8);
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b), b1 = _mm256_loadu_pd(b + 4), b2 = _mm256_loadu_pd(b + 8);
    __m256d av = _mm256_broadcast_sd(a);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    c02 = _mm256_fmadd_pd(av, b2, c02);
    av = _mm256_broadcast_sd(a + 1);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    c12 = _mm256_fmadd_pd(av, b2, c12);
    av = _mm256_broadcast_sd(a + 2);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    c22 = _mm256_fmadd_pd(av, b2, c22);
    av = _mm256_broadcast_sd(a + 3);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
    c32 = _mm256_fmadd_pd(av, b2, c32);
    a += kMr;
    b += kNr;
  }
  _mm256_storeu_pd(c, c00), _mm256_storeu_pd(c + 4, c01), _mm256_storeu_pd(c + 8, c02);
  _mm256_storeu_pd(c1, c10), _mm256_storeu_pd(c1 + 4, c11), _mm256_storeu_pd(c1 + 8, c12);
  _mm256_storeu_pd(c2, c20), _mm256_storeu_pd(c2 + 4, c21), _mm256_storeu_pd(c2 + 8, c22);
  _mm256_storeu_pd(c3, c30), _mm256_storeu_pd(c3 + 4, c31), _mm256_storeu_pd(c3 + 8, c32);
}

template <int MR, int NR>
inline void micro_nt(std::size_t k, const double* a, std::size_t lda,
                     const double* b, std::size_t ldb, double* c,
                     std::size_t ldc) {
  __m256d acc[MR][NR];
  for (int r = 0; r < MR; ++r)
    for (int s = 0; s < NR; ++s) acc[r][s] = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    __m256d av[MR];
    for (int r = 0; r < MR; ++r) av[r] = _mm256_loadu_pd(a + r * lda + p);
    // One B vector live at a time keeps MR*NR + MR + 1 registers.
    for (int s = 0; s < NR; ++s) {
      const __m256d bv = _mm256_loadu_pd(b + s * ldb + p);
      for (int r = 0; r < MR; ++r) acc[r][s] = _mm256_fmadd_pd(av[r], bv, acc[r][s]);
    }
  }
  for (int r = 0; r < MR; ++r) {
    for (int s = 0; s < NR; ++s) {
      double t = hsum(acc[r][s]);
      for (std::size_t q = p; q < k; ++q) t = std::fma(a[r * lda + q], b[s * ldb + q], t);
      c[r * ldc + s] += t;
    }
  }
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
  thread_local std::vector<double> bpack, apack;
  bpack.resize(kKc * kNc);
  apack.resize(kMr * kKc);
  alignas(32) double tile[kMr * kNr];
  for (std::size_t p0 = 0; p0 < k; p0 += kKc) {
    const std::size_t kc = std::min(kKc, k - p0);
    for (std::size_t j0 = 0; j0 < n; j0 += kNc) {
      const std::size_t nc = std::min(kNc, n - j0);
      pack_b(kc, nc, b + p0 * ldb + j0, ldb, bpack.data());
      for (std::size_t i = 0; i < m; i += kMr) {
        const std::size_t mr = std::min(kMr, m - i);
        pack_a(mr, kc, a + i * lda + p0, lda, apack.data());
        for (std::size_t js = 0; js < nc; js += kNr) {
          const std::size_t nr = std::min(kNr, nc - js);
          double* cij = c + i * ldc + j0 + js;
          const double* bs = bpack.data() + js * kc;
          if (mr == kMr && nr == kNr) {
            micro_nn(kc, apack.data(), bs, cij, ldc);
            continue;
          }
          for (std::size_t r = 0; r < kMr; ++r)
            for (std::size_t q = 0; q < kNr; ++q)
              tile[r * kNr + q] = (r < mr && q < nr) ? cij[r * ldc + q] : 0.0;
          micro_nn(kc, apack.data(), bs, tile, kNr);
          for (std::size_t r = 0; r < mr; ++r)
            for (std::size_t q = 0; q < nr; ++q) cij[r * ldc + q] = tile[r * kNr + q];
        }
      }
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
  // Blocking the reduction keeps the active slice of B resident in L2.
  constexpr std::size_t kBlock = 256;
  for (std::size_t p0 = 0; p0 < k; p0 += kBlock) {
    const std::size_t kc = std::min(kBlock, k - p0);
    const double* ap = a + p0;
    const double* bp = b + p0;
    std::size_t i = 0;
    for (; i + 3 <= m; i += 3) {
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) micro_nt<3, 4>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
      for (; j < n; ++j) micro_nt<3, 1>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
    }
    for (; i < m; ++i) {
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) micro_nt<1, 4>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
      for (; j < n; ++j) micro_nt<1, 1>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
    }
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double t = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) t = std::fma(x[i], y[i], t);
  return t;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double sum(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double t = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) t += x[i];
  return t;
}

}  // namespace wmark::kernels::avx2
