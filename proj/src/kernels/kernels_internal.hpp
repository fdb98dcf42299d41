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

#include <cstddef>

#include "wmark/kernels.hpp"

namespace wmark::kernels {

#define WMARK_KERNEL_DECLS                                                    \
  void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, \
               std::size_t lda, const double* b, std::size_t ldb, double* c, \
               std::size_t ldc);                                             \
  void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, \
               std::size_t lda, const double* b, std::size_t ldb, double* c, \
               std::size_t ldc);                                             \
  double dot(const double* x, const double* y, std::size_t n);               \
  void axpy(double alpha, const double* x, double* y, std::size_t n);        \
  double sum(const double* x, std::size_t n);

namespace scalar {
WMARK_KERNEL_DECLS
}
#if defined(WMARK_HAVE_AVX2)
namespace avx2 {
WMARK_KERNEL_DECLS
}
#endif

#if defined(WMARK_HAVE_AVX512)
namespace avx512 {
WMARK_KERNEL_DECLS
}
#endif

#undef WMARK_KERNEL_DECLS

}  // namespace wmark::kernels
