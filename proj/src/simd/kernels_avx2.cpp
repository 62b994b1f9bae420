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

#include <immintrin.h>

#include <cmath>

#include "kernel_variants.hpp"

namespace invcf::simd::avx2 {
namespace {

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
  return _mm_cvtss_f32(s);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t k = 0;
  for (; k + 16 <= n; k += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k + 8), _mm256_loadu_ps(b + k + 8),
                           acc1);
  }
  if (k + 8 <= n) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc0);
    k += 8;
  }
  float sum = hsum(_mm256_add_ps(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4),
                           acc1);
  }
  if (k + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    k += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

float squared_distance_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k));
    acc = _mm256_fmadd_ps(d, d, acc);
  }
  float sum = hsum(acc);
  for (; k < n; ++k) {
    const float d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

double squared_distance_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = hsum(acc);
  for (; k < n; ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    _mm256_storeu_ps(y + k,
                     _mm256_fmadd_ps(va, _mm256_loadu_ps(x + k), _mm256_loadu_ps(y + k)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(y + k,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void pair_axpy_f32(float alpha, const float* a, const float* b, float* ya, float* yb,
                   std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256 v = _mm256_mul_ps(va, _mm256_sub_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k)));
    _mm256_storeu_ps(ya + k, _mm256_add_ps(_mm256_loadu_ps(ya + k), v));
    _mm256_storeu_ps(yb + k, _mm256_sub_ps(_mm256_loadu_ps(yb + k), v));
  }
  for (; k < n; ++k) {
    const float v = alpha * (a[k] - b[k]);
    ya[k] += v;
    yb[k] -= v;
  }
}

void pair_axpy_f64(double alpha, const double* a, const double* b, double* ya, double* yb,
                   std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_mul_pd(va, _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
    _mm256_storeu_pd(ya + k, _mm256_add_pd(_mm256_loadu_pd(ya + k), v));
    _mm256_storeu_pd(yb + k, _mm256_sub_pd(_mm256_loadu_pd(yb + k), v));
  }
  for (; k < n; ++k) {
    const double v = alpha * (a[k] - b[k]);
    ya[k] += v;
    yb[k] -= v;
  }
}

void dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t dim,
                  const float* q, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_f32(rows + r * dim, q, dim);
}

void dot_rows_f64(const double* rows, std::size_t n_rows, std::size_t dim,
                  const double* q, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_f64(rows + r * dim, q, dim);
}

void adam_f32(float* param, const float* grad, float* m, float* v, std::size_t n,
              float beta1, float beta2, float step_size, float inv_sqrt_bc2,
              float eps) {
  const __m256 b1 = _mm256_set1_ps(beta1);
  const __m256 b2 = _mm256_set1_ps(beta2);
  const __m256 omb1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 omb2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 step = _mm256_set1_ps(step_size);
  const __m256 ibc2 = _mm256_set1_ps(inv_sqrt_bc2);
  const __m256 ve = _mm256_set1_ps(eps);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256 g = _mm256_loadu_ps(grad + k);
    const __m256 mk =
        _mm256_add_ps(_mm256_mul_ps(b1, _mm256_loadu_ps(m + k)), _mm256_mul_ps(omb1, g));
    const __m256 vk = _mm256_add_ps(_mm256_mul_ps(b2, _mm256_loadu_ps(v + k)),
                                    _mm256_mul_ps(omb2, _mm256_mul_ps(g, g)));
    _mm256_storeu_ps(m + k, mk);
    _mm256_storeu_ps(v + k, vk);
    const __m256 denom = _mm256_add_ps(_mm256_mul_ps(_mm256_sqrt_ps(vk), ibc2), ve);
    const __m256 upd = _mm256_mul_ps(step, _mm256_div_ps(mk, denom));
    _mm256_storeu_ps(param + k, _mm256_sub_ps(_mm256_loadu_ps(param + k), upd));
  }
  for (; k < n; ++k) {
    const float g = grad[k];
    const float mk = beta1 * m[k] + (1.0f - beta1) * g;
    const float vk = beta2 * v[k] + (1.0f - beta2) * (g * g);
    m[k] = mk;
    v[k] = vk;
    const float denom = std::sqrt(vk) * inv_sqrt_bc2 + eps;
    param[k] -= step_size * (mk / denom);
  }
}

void adam_f64(double* param, const double* grad, double* m, double* v, std::size_t n,
              double beta1, double beta2, double step_size, double inv_sqrt_bc2,
              double eps) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d step = _mm256_set1_pd(step_size);
  const __m256d ibc2 = _mm256_set1_pd(inv_sqrt_bc2);
  const __m256d ve = _mm256_set1_pd(eps);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d g = _mm256_loadu_pd(grad + k);
    const __m256d mk =
        _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + k)), _mm256_mul_pd(omb1, g));
    const __m256d vk = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + k)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + k, mk);
    _mm256_storeu_pd(v + k, vk);
    const __m256d denom = _mm256_add_pd(_mm256_mul_pd(_mm256_sqrt_pd(vk), ibc2), ve);
    const __m256d upd = _mm256_mul_pd(step, _mm256_div_pd(mk, denom));
    _mm256_storeu_pd(param + k, _mm256_sub_pd(_mm256_loadu_pd(param + k), upd));
  }
  for (; k < n; ++k) {
    const double g = grad[k];
    const double mk = beta1 * m[k] + (1.0 - beta1) * g;
    const double vk = beta2 * v[k] + (1.0 - beta2) * (g * g);
    m[k] = mk;
    v[k] = vk;
    const double denom = std::sqrt(vk) * inv_sqrt_bc2 + eps;
    param[k] -= step_size * (mk / denom);
  }
}

}  // namespace

const KernelTable<float> kF32{&dot_f32, &squared_distance_f32, &axpy_f32, &pair_axpy_f32,
                              &dot_rows_f32, &adam_f32};
const KernelTable<double> kF64{&dot_f64, &squared_distance_f64, &axpy_f64, &pair_axpy_f64,
                               &dot_rows_f64, &adam_f64};

}  // namespace invcf::simd::avx2
