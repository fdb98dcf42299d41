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
#include <string_view>

// Dense double-precision inner loops. Every kernel has a portable scalar
// reference plus AVX2/FMA and AVX-512F variants; the widest one the CPU
// supports is picked once at runtime from CPUID. WMARK_ISA=scalar|avx2|avx512
// or force_isa() pins a specific table.
namespace wmark::kernels {

enum class Isa { kScalar, kAvx2, kAvx512 };

struct KernelTable {
  Isa isa;
  // C[M x N] += A[M x K] * B[K x N]; all row-major with explicit strides.
  // Variants differ from the scalar reference only by rounding (FMA, lane order).
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc);
  // C[M x N] += A[M x K] * B[N x K]^T.
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();
// Null when the build or the CPU lacks AVX-512F.
const KernelTable* avx512_table();

bool isa_supported(Isa isa);
const KernelTable& table(Isa isa);

// Table used by the layers. Resolved on first use.
const KernelTable& active();
Isa active_isa();
// Pins the active table; throws std::runtime_error if unsupported.
void force_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace wmark::kernels
