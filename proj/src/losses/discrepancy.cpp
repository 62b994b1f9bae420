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

#include "invcf/losses/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "invcf/error.hpp"
#include "invcf/simd/kernels.hpp"

namespace invcf::losses {

namespace {

constexpr double kDcorFloor = 1e-9;

template <typename Real>
Matrix<double> to_double(const Matrix<Real>& m) {
  if constexpr (std::is_same_v<Real, double>) {
    return m;
  } else {
    Matrix<double> out(m.rows(), m.cols());
    std::copy(m.values().begin(), m.values().end(), out.values().begin());
    return out;
  }
}

template <typename Real>
Matrix<Real> from_double(const Matrix<double>& m) {
  if constexpr (std::is_same_v<Real, double>) {
    return m;
  } else {
    Matrix<Real> out(m.rows(), m.cols());
    std::transform(m.values().begin(), m.values().end(), out.values().begin(),
                   [](double v) { return static_cast<Real>(v); });
    return out;
  }
}

template <typename Real>
void check_paired(const Matrix<Real>& x, const Matrix<Real>& y, const char* what) {
  if (x.rows() != y.rows()) fail(ErrorCode::invalid_input, std::string(what) + ": row counts differ");
}

// Pairwise Euclidean distances; symmetric with zero diagonal.
Matrix<double> distances(const Matrix<double>& x) {
  const auto& k = simd::active<double>();
  const std::size_t n = x.rows();
  Matrix<double> a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = j + 1; l < n; ++l) {
      const double d = std::sqrt(k.squared_distance(x.row(j).data(), x.row(l).data(), x.cols()));
      a(j, l) = d;
      a(l, j) = d;
    }
  }
  return a;
}

// Distance matrix plus the row and grand means needed to double-center it
// without materializing the centered copy.
struct Centered {
  Matrix<double> dist;
  std::vector<double> mean;
  double grand = 0;

  double at(std::size_t j, std::size_t l) const { return dist(j, l) - mean[j] - mean[l] + grand; }
};

Centered center(const Matrix<double>& x) {
  Centered c{distances(x), std::vector<double>(x.rows(), 0.0), 0.0};
  const std::size_t n = x.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t l = 0; l < n; ++l) s += c.dist(j, l);
    c.mean[j] = s / double(n);
    c.grand += s;
  }
  c.grand /= double(n) * double(n);
  return c;
}

// grad_j = 2 sum_l coef_jl (x_j - x_l) / dist_jl, skipping zero distances.
Matrix<double> distance_backward(const Matrix<double>& x, const Matrix<double>& dist,
                                 const Matrix<double>& coef) {
  const auto& k = simd::active<double>();
  const std::size_t n = x.rows(), d = x.cols();
  Matrix<double> g(n, d);
  for (std::size_t j = 0; j < n; ++j) {
    double self = 0;
    double* gj = g.row(j).data();
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j || dist(j, l) == 0) continue;
      const double c = 2 * coef(j, l) / dist(j, l);
      self += c;
      k.axpy(-c, x.row(l).data(), gj, d);
    }
    k.axpy(self, x.row(j).data(), gj, d);
  }
  return g;
}

struct DcorParts {
  Centered a, b;
  double cov = 0, var_x = 0, var_y = 0, value = 0;
  bool degenerate = true;
};

DcorParts dcor_parts(const Matrix<double>& x, const Matrix<double>& y) {
  if (x.rows() < 2) fail(ErrorCode::invalid_input, "dcor needs at least 2 rows");
  DcorParts p{center(x), center(y)};
  const std::size_t n = x.rows();
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      const double A = p.a.at(j, l), B = p.b.at(j, l);
      ab += A * B;
      aa += A * A;
      bb += B * B;
    }
  }
  const double nn = double(n) * double(n);
  p.cov = ab / nn;
  p.var_x = aa / nn;
  p.var_y = bb / nn;
  const double denom = std::sqrt(std::sqrt(p.var_x * p.var_y));
  if (denom > kDcorFloor) {
    p.degenerate = false;
    p.value = std::sqrt(std::max(p.cov, 0.0)) / denom;
  }
  return p;
}

}  // namespace

template <typename Real>
double dcor(const Matrix<Real>& x, const Matrix<Real>& y) {
  check_paired(x, y, "dcor");
  return std::min(dcor_parts(to_double(x), to_double(y)).value, 1.0);
}

template <typename Real>
DiscrepancyResult<Real> dcor_with_grad(const Matrix<Real>& x, const Matrix<Real>& y) {
  check_paired(x, y, "dcor");
  const auto xd = to_double(x), yd = to_double(y);
  const auto p = dcor_parts(xd, yd);
  DiscrepancyResult<Real> r{std::min(p.value, 1.0), Matrix<Real>(x.rows(), x.cols()),
                            Matrix<Real>(y.rows(), y.cols())};
  if (p.degenerate || p.cov <= 0) return r;
  const std::size_t n = x.rows();
  const double nn = double(n) * double(n);
  const double kx = p.value / (p.cov * nn), kxx = p.value / (p.var_x * nn);
  const double ky = p.value / (p.var_y * nn);
  const auto& k = simd::active<double>();
  Matrix<double> gx(n, x.cols()), gy(n, y.cols());
  // Coefficients are symmetric, so each unordered pair carries both directions.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = j + 1; l < n; ++l) {
      const double A = p.a.at(j, l), B = p.b.at(j, l);
      if (const double dx = p.a.dist(j, l); dx != 0) {
        k.pair_axpy((kx * B - kxx * A) / dx, xd.row(j).data(), xd.row(l).data(),
                    gx.row(j).data(), gx.row(l).data(), x.cols());
      }
      if (const double dy = p.b.dist(j, l); dy != 0) {
        k.pair_axpy((kx * A - ky * B) / dy, yd.row(j).data(), yd.row(l).data(),
                    gy.row(j).data(), gy.row(l).data(), y.cols());
      }
    }
  }
  r.grad_x = from_double<Real>(gx);
  r.grad_y = from_double<Real>(gy);
  return r;
}

namespace {

struct MmdParts {
  Matrix<double> z;     // pooled rows, x first
  Matrix<double> dist;  // pooled pairwise distances
  std::size_t nx = 0, ny = 0;
  double sigma = 1;
  // Pooled pairs whose distances define the median (one or two); empty if fixed.
  std::vector<std::pair<std::size_t, std::size_t>> median_pairs;
  double raw = 0;

  double weight(std::size_t j, std::size_t l) const {
    const bool xj = j < nx, xl = l < nx;
    if (xj && xl) return 1.0 / (double(nx) * double(nx));
    if (!xj && !xl) return 1.0 / (double(ny) * double(ny));
    return -1.0 / (double(nx) * double(ny));
  }
};

MmdParts mmd_parts(const Matrix<double>& x, const Matrix<double>& y, std::optional<double> bw) {
  if (x.rows() == 0 || y.rows() == 0) fail(ErrorCode::invalid_input, "mmd needs nonempty samples");
  if (x.cols() != y.cols()) fail(ErrorCode::invalid_input, "mmd: column counts differ");
  MmdParts p;
  p.nx = x.rows();
  p.ny = y.rows();
  p.z = Matrix<double>(p.nx + p.ny, x.cols());
  std::copy(x.values().begin(), x.values().end(), p.z.values().begin());
  std::copy(y.values().begin(), y.values().end(),
            p.z.values().begin() + std::ptrdiff_t(x.values().size()));
  p.dist = distances(p.z);
  const std::size_t m = p.z.rows();
  if (bw) {
    if (!(*bw > 0)) fail(ErrorCode::config, "mmd bandwidth must be > 0");
    p.sigma = *bw;
  } else if (m >= 2) {
    std::vector<std::pair<double, std::size_t>> pairs;
    pairs.reserve(m * (m - 1) / 2);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = j + 1; l < m; ++l) pairs.emplace_back(p.dist(j, l), j * m + l);
    }
    std::sort(pairs.begin(), pairs.end());
    const std::size_t c = pairs.size();
    std::vector<std::size_t> picks{(c - 1) / 2};
    if (c % 2 == 0) picks.push_back(c / 2);
    double med = 0;
    for (auto k : picks) med += pairs[k].first;
    med /= double(picks.size());
    if (med > 0) {
      p.sigma = med;
      for (auto k : picks) p.median_pairs.emplace_back(pairs[k].second / m, pairs[k].second % m);
    }
  }
  const double s2 = 2 * p.sigma * p.sigma;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      const double d = p.dist(j, l);
      p.raw += p.weight(j, l) * std::exp(-d * d / s2);
    }
  }
  return p;
}

}  // namespace

template <typename Real>
double mmd(const Matrix<Real>& x, const Matrix<Real>& y, std::optional<double> bandwidth) {
  return std::max(mmd_parts(to_double(x), to_double(y), bandwidth).raw, 0.0);
}

template <typename Real>
DiscrepancyResult<Real> mmd_with_grad(const Matrix<Real>& x, const Matrix<Real>& y,
                                      std::optional<double> bandwidth) {
  const auto p = mmd_parts(to_double(x), to_double(y), bandwidth);
  DiscrepancyResult<Real> r{std::max(p.raw, 0.0), Matrix<Real>(x.rows(), x.cols()),
                            Matrix<Real>(y.rows(), y.cols())};
  if (p.raw <= 0) return r;
  const std::size_t m = p.z.rows(), d = p.z.cols();
  const double s2 = p.sigma * p.sigma;
  // d/dz_j of sum_{j,l} W k(d_jl) through the distances, written as the
  // distance-coefficient form so distance_backward can be reused.
  Matrix<double> coef(m, m);
  double d_sigma = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      const double dist = p.dist(j, l);
      const double wk = p.weight(j, l) * std::exp(-dist * dist / (2 * s2));
      coef(j, l) = -wk * dist / s2;
      d_sigma += wk * dist * dist / (s2 * p.sigma);
    }
  }
  Matrix<double> g = distance_backward(p.z, p.dist, coef);
  const auto& k = simd::active<double>();
  for (auto [a, b] : p.median_pairs) {
    const double c = d_sigma / double(p.median_pairs.size()) / p.dist(a, b);
    k.axpy(c, p.z.row(a).data(), g.row(a).data(), d);
    k.axpy(-c, p.z.row(b).data(), g.row(a).data(), d);
    k.axpy(c, p.z.row(b).data(), g.row(b).data(), d);
    k.axpy(-c, p.z.row(a).data(), g.row(b).data(), d);
  }
  for (std::size_t j = 0; j < p.nx; ++j) {
    std::transform(g.row(j).begin(), g.row(j).end(), r.grad_x.row(j).begin(),
                   [](double v) { return static_cast<Real>(v); });
  }
  for (std::size_t j = 0; j < p.ny; ++j) {
    std::transform(g.row(p.nx + j).begin(), g.row(p.nx + j).end(), r.grad_y.row(j).begin(),
                   [](double v) { return static_cast<Real>(v); });
  }
  return r;
}

template <typename Real>
double l2_discrepancy(const Matrix<Real>& x, const Matrix<Real>& y) {
  return l2_with_grad(x, y).value;
}

template <typename Real>
DiscrepancyResult<Real> l2_with_grad(const Matrix<Real>& x, const Matrix<Real>& y) {
  check_paired(x, y, "l2_discrepancy");
  const std::size_t n = x.rows(), d = x.cols();
  DiscrepancyResult<Real> r{0, Matrix<Real>(n, d), Matrix<Real>(n, d)};
  if (n == 0) return r;
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double sq = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = double(x(k, c)) - double(y(k, c));
      sq += diff * diff;
    }
    const double norm = std::sqrt(sq);
    sum += norm;
    if (norm == 0) continue;
    for (std::size_t c = 0; c < d; ++c) {
      const double g = -(double(x(k, c)) - double(y(k, c))) / (norm * double(n));
      r.grad_x(k, c) = static_cast<Real>(g);
      r.grad_y(k, c) = static_cast<Real>(-g);
    }
  }
  r.value = -sum / double(n);
  return r;
}

template <typename Real>
DiscrepancyResult<Real> discrepancy_with_grad(Discrepancy kind, const Matrix<Real>& x,
                                              const Matrix<Real>& y,
                                              std::optional<double> bandwidth) {
  switch (kind) {
    case Discrepancy::dcor: return dcor_with_grad(x, y);
    case Discrepancy::mmd: return mmd_with_grad(x, y, bandwidth);
    case Discrepancy::l2: return l2_with_grad(x, y);
  }
  fail(ErrorCode::config, "unknown discrepancy");
}

#define INVCF_INSTANTIATE(Real)                                                                 \
  template double dcor(const Matrix<Real>&, const Matrix<Real>&);                               \
  template DiscrepancyResult<Real> dcor_with_grad(const Matrix<Real>&, const Matrix<Real>&);    \
  template double mmd(const Matrix<Real>&, const Matrix<Real>&, std::optional<double>);         \
  template DiscrepancyResult<Real> mmd_with_grad(const Matrix<Real>&, const Matrix<Real>&,      \
                                                 std::optional<double>);                        \
  template double l2_discrepancy(const Matrix<Real>&, const Matrix<Real>&);                     \
  template DiscrepancyResult<Real> l2_with_grad(const Matrix<Real>&, const Matrix<Real>&);      \
  template DiscrepancyResult<Real> discrepancy_with_grad(Discrepancy, const Matrix<Real>&,      \
                                                         const Matrix<Real>&,                   \
                                                         std::optional<double>);

INVCF_INSTANTIATE(float)
INVCF_INSTANTIATE(double)
#undef INVCF_INSTANTIATE

}  // namespace invcf::losses
