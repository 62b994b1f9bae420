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

#include <cmath>

#include "kernel_variants.hpp"

namespace invcf::simd::scalar {
namespace {

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

template <typename Real>
Real squared_distance(const Real* a, const Real* b, std::size_t n) {
  Real sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Real diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

template <typename Real>
void pair_axpy(Real alpha, const Real* a, const Real* b, Real* ya, Real* yb, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const Real v = alpha * (a[k] - b[k]);
    ya[k] += v;
    yb[k] -= v;
  }
}

template <typename Real>
void dot_rows(const Real* rows, std::size_t n_rows, std::size_t dim,
              const Real* q, Real* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(rows + r * dim, q, dim);
}

template <typename Real>
void adam(Real* param, const Real* grad, Real* m, Real* v, std::size_t n,
          Real beta1, Real beta2, Real step_size, Real inv_sqrt_bc2, Real eps) {
  const Real one_minus_b1 = Real(1) - beta1;
  const Real one_minus_b2 = Real(1) - beta2;
  for (std::size_t k = 0; k < n; ++k) {
    const Real g = grad[k];
    const Real mk = beta1 * m[k] + one_minus_b1 * g;
    const Real vk = beta2 * v[k] + one_minus_b2 * (g * g);
    m[k] = mk;
    v[k] = vk;
    const Real denom = std::sqrt(vk) * inv_sqrt_bc2 + eps;
    param[k] -= step_size * (mk / denom);
  }
}

}  // namespace

const KernelTable<float> kF32{&dot<float>, &squared_distance<float>,
                              &axpy<float>, &pair_axpy<float>, &dot_rows<float>, &adam<float>};
const KernelTable<double> kF64{&dot<double>, &squared_distance<double>,
                               &axpy<double>, &pair_axpy<double>, &dot_rows<double>, &adam<double>};

}  // namespace invcf::simd::scalar
