// Copyright 2026-present the invcf project
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
#include <string_view>

#include "invcf/error.hpp"
#include "kernel_variants.hpp"

namespace invcf::simd {
namespace {

Isa detect() noexcept {
#if defined(INVCF_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::avx2;
  }
#endif
  return Isa::scalar;
}

Isa initial_isa() noexcept {
  const Isa best = detect();
  if (const char* env = std::getenv("INVCF_SIMD")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::scalar || detect() == Isa::avx2;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    fail(ErrorCode::config, std::string("SIMD variant not available: ") + to_string(isa));
  }
  current().store(isa, std::memory_order_relaxed);
}

template <>
const KernelTable<float>& table<float>(Isa isa) {
#if defined(INVCF_HAVE_AVX2)
  if (isa == Isa::avx2) return avx2::kF32;
#endif
  (void)isa;
  return scalar::kF32;
}

template <>
const KernelTable<double>& table<double>(Isa isa) {
#if defined(INVCF_HAVE_AVX2)
  if (isa == Isa::avx2) return avx2::kF64;
#endif
  (void)isa;
  return scalar::kF64;
}

template <>
const KernelTable<float>& active<float>() {
  return table<float>(active_isa());
}

template <>
const KernelTable<double>& active<double>() {
  return table<double>(active_isa());
}

}  // namespace invcf::simd
