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
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace wmark::kernels {
namespace {

const KernelTable kScalar{Isa::kScalar, scalar::gemm_nn, scalar::gemm_nt,
                          scalar::dot, scalar::axpy, scalar::sum};

#if defined(WMARK_HAVE_AVX2)
const KernelTable kAvx2{Isa::kAvx2, avx2::gemm_nn, avx2::gemm_nt, avx2::dot,
                        avx2::axpy, avx2::sum};
#endif

#if defined(WMARK_HAVE_AVX512)
const KernelTable kAvx512{Isa::kAvx512, avx512::gemm_nn, avx512::gemm_nt, avx512::dot,
                          avx512::axpy, avx512::sum};
#endif

bool cpu_has_avx512() {
#if defined(WMARK_HAVE_AVX512) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx512f");
#else
  return false;
#endif
}

bool cpu_has_avx2() {
#if defined(WMARK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve_default() {
  if (const char* env = std::getenv("WMARK_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && cpu_has_avx2()) return avx2_table();
    if (want == "avx512" && cpu_has_avx512()) return avx512_table();
  }
  if (cpu_has_avx512()) return avx512_table();
  if (cpu_has_avx2()) return avx2_table();
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{resolve_default()};
  return ptr;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(WMARK_HAVE_AVX2)
  return cpu_has_avx2() ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* avx512_table() {
#if defined(WMARK_HAVE_AVX512)
  return cpu_has_avx512() ? &kAvx512 : nullptr;
#else
  return nullptr;
#endif
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return avx2_table() != nullptr;
    case Isa::kAvx512: return avx512_table() != nullptr;
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::kScalar) return kScalar;
  const KernelTable* t = isa == Isa::kAvx2 ? avx2_table() : avx512_table();
  if (t == nullptr)
    throw std::runtime_error(std::string(isa_name(isa)) + " kernels unavailable on this CPU/build");
  return *t;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Isa active_isa() { return active().isa; }

void force_isa(Isa isa) { current().store(&table(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kAvx512: return "avx512";
  }
  return "unknown";
}

}  // namespace wmark::kernels
