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

#pragma once

#include <cstddef>
#include <span>

// Inner-loop arithmetic used by the losses, the optimizer and the ranker.
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The active variant is picked once at startup from CPUID and can be
// pinned with INVCF_SIMD=scalar|avx2.

namespace invcf::simd {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa) noexcept;

template <typename Real>
struct KernelTable {
  Real (*dot)(const Real* a, const Real* b, std::size_t n);
  Real (*squared_distance)(const Real* a, const Real* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  // v = alpha * (a - b); ya += v; yb -= v. No FMA, bitwise equal across ISAs.
  void (*pair_axpy)(Real alpha, const Real* a, const Real* b, Real* ya, Real* yb, std::size_t n);
  // out[r] = rows[r, :] . q for a row-major (n_rows x dim) block
  void (*dot_rows)(const Real* rows, std::size_t n_rows, std::size_t dim,
                   const Real* q, Real* out);
  // Bias-corrected Adam on one contiguous row. No fused multiply-add, so the
  // vector and scalar variants agree bitwise.
  void (*adam)(Real* param, const Real* grad, Real* m, Real* v, std::size_t n,
               Real beta1, Real beta2, Real step_size, Real inv_sqrt_bc2,
               Real eps);
};

bool isa_available(Isa isa) noexcept;
Isa active_isa() noexcept;
// Throws invcf::Error(config) when the ISA is not available on this CPU.
void set_active_isa(Isa isa);

template <typename Real>
const KernelTable<Real>& table(Isa isa);

template <typename Real>
const KernelTable<Real>& active();

template <typename Real>
inline Real dot(std::span<const Real> a, std::span<const Real> b) {
  return active<Real>().dot(a.data(), b.data(), a.size());
}

template <typename Real>
inline Real squared_distance(std::span<const Real> a, std::span<const Real> b) {
  return active<Real>().squared_distance(a.data(), b.data(), a.size());
}

template <typename Real>
inline void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  active<Real>().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace invcf::simd
