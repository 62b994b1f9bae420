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

#include <optional>

#include "invcf/losses/config.hpp"
#include "invcf/matrix.hpp"

namespace invcf::losses {

/// Value plus gradients w.r.t. every row of X and Y. Internals run in double.
template <typename Real>
struct DiscrepancyResult {
  double value = 0;
  Matrix<Real> grad_x;
  Matrix<Real> grad_y;
};

/// Sample distance correlation of paired rows, in [0, 1]. Returns 0 when the
/// distance-variance denominator is <= 1e-9.
template <typename Real>
double dcor(const Matrix<Real>& x, const Matrix<Real>& y);
template <typename Real>
DiscrepancyResult<Real> dcor_with_grad(const Matrix<Real>& x, const Matrix<Real>& y);

/// Biased RBF-kernel MMD^2, clipped at 0. No bandwidth means sigma = median
/// pairwise distance over the pooled rows (1 if that median is 0); the
/// gradient then also flows through the median pair.
template <typename Real>
double mmd(const Matrix<Real>& x, const Matrix<Real>& y, std::optional<double> bandwidth);
template <typename Real>
DiscrepancyResult<Real> mmd_with_grad(const Matrix<Real>& x, const Matrix<Real>& y,
                                      std::optional<double> bandwidth);

/// -(1/n) sum_k |x_k - y_k|.
template <typename Real>
double l2_discrepancy(const Matrix<Real>& x, const Matrix<Real>& y);
template <typename Real>
DiscrepancyResult<Real> l2_with_grad(const Matrix<Real>& x, const Matrix<Real>& y);

template <typename Real>
DiscrepancyResult<Real> discrepancy_with_grad(Discrepancy kind, const Matrix<Real>& x,
                                              const Matrix<Real>& y,
                                              std::optional<double> bandwidth);

}  // namespace invcf::losses
