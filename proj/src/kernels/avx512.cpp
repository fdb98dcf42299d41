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
// Compiled with -mavx512f -mfma; only reached through the dispatch table
// after a CPUID check. Same loop structure as the AVX2 variant with 8-lane
// vectors and a larger register tile.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels_internal.hpp"

namespace wmark::kernels::avx512 {
namespace {

constexpr std::size_t kKc = 256;
constexpr std::size_t kNc = 1024;  // multiple of kNr
constexpr std::size_t kMr = 8;
constexpr std::size_t kNr = 16;

void pack_b(std::size_t kc, std::size_t nc, const double* b, std::size_t ldb, double* out) {
  for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
    const std::size_t w = std::min(kNr, nc - j0);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* src = b + p * ldb + j0;
      if (w == kNr) {
        _mm512_storeu_pd(out, _mm512_loadu_pd(src));
        _mm512_storeu_pd(out + 8, _mm512_loadu_pd(src + 8));
      } else {
        std::size_t j = 0;
        for (; j < w; ++j) out[j] = src[j];
        for (; j < kNr; ++j) out[j] = 0.0;
      }
      out += kNr;
    }
  }
}

void pack_a(std::size_t mr, std::size_t kc, const double* a, std::size_t lda, double* out) {
  for (std::size_t p = 0; p < kc; ++p) {
    std::size_t r = 0;
    for (; r < mr; ++r) out[r] = a[r * lda + p];
    for (; r < kMr; ++r) out[r] = 0.0;
    out += kMr;
  }
}

// C[8 x 16] tile += packed A panel * packed B strip, increasing p.
inline void micro_nn(std::size_t kc, const double* a, const double* b, double* c,
                     std::size_t ldc) {
  __m512d acc[kMr][2];
  for (std::size_t r = 0; r < kMr; ++r) {
    acc[r][0] = _mm512_loadu_pd(c + r * ldc);
    acc[r][1] = _mm512_loadu_pd(c + r * ldc + 8);
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const __m512d b0 = _mm512_loadu_pd(b);
    const __m512d b1 = _mm512_loadu_pd(b + 8);
    for (std::size_t r = 0; r < kMr; ++r) {
      const __m512d av = _mm512_set1_pd(a[r]);
      acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
    }
    a += kMr;
    b += kNr;
  }
  for (std::size_t r = 0; r < kMr; ++r) {
    _mm512_storeu_pd(c + r * ldc, acc[r][0]);
    _mm512_storeu_pd(c + r * ldc + 8, acc[r][1]);
  }
}

template <int MR, int NR>
inline void micro_nt(std::size_t k, const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc) {
  __m512d acc[MR][NR];
  for (int r = 0; r < MR; ++r)
    for (int s = 0; s < NR; ++s) acc[r][s] = _mm512_setzero_pd();
  std::size_t p = 0;
  for (; p + 8 <= k; p += 8) {
    __m512d av[MR];
    for (int r = 0; r < MR; ++r) av[r] = _mm512_loadu_pd(a + r * lda + p);
    for (int s = 0; s < NR; ++s) {
      const __m512d bv = _mm512_loadu_pd(b + s * ldb + p);
      for (int r = 0; r < MR; ++r) acc[r][s] = _mm512_fmadd_pd(av[r], bv, acc[r][s]);
    }
  }
  for (int r = 0; r < MR; ++r) {
    for (int s = 0; s < NR; ++s) {
      double t = _mm512_reduce_add_pd(acc[r][s]);
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
  alignas(64) double tile[kMr * kNr];
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
  constexpr std::size_t kBlock = 256;
  for (std::size_t p0 = 0; p0 < k; p0 += kBlock) {
    const std::size_t kc = std::min(kBlock, k - p0);
    const double* ap = a + p0;
    const double* bp = b + p0;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) micro_nt<4, 4>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
      for (; j < n; ++j) micro_nt<4, 1>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
    }
    for (; i < m; ++i) {
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) micro_nt<1, 4>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
      for (; j < n; ++j) micro_nt<1, 1>(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
    }
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  __m512d a0 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) a0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), a0);
  double t = _mm512_reduce_add_pd(a0);
  for (; i < n; ++i) t = std::fma(x[i], y[i], t);
  return t;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m512d av = _mm512_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(y + i, _mm512_fmadd_pd(av, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double sum(const double* x, std::size_t n) {
  __m512d a0 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) a0 = _mm512_add_pd(a0, _mm512_loadu_pd(x + i));
  double t = _mm512_reduce_add_pd(a0);
  for (; i < n; ++i) t += x[i];
  return t;
}

}  // namespace wmark::kernels::avx512
