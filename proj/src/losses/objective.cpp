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

#include "invcf/losses/objective.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "invcf/error.hpp"
#include "invcf/losses/discrepancy.hpp"
#include "invcf/simd/kernels.hpp"

namespace invcf::losses {

namespace {

// A scored vector: preference half r, optional popularity half p (for the
// concatenated 2d form) and its cached squared norm.
template <typename Real>
struct View {
  const Real* r;
  const Real* p;
  double sq;
};

// Where d(loss)/d(view) goes; null members drop that half's gradient.
template <typename Real>
struct Sink {
  Real* r;
  Real* p;
};

// Fills coef with d(loss)/d(s_j); s[0] is the positive.
double risk_and_coefs(Risk risk, const std::vector<double>& s, double tau,
                      std::vector<double>& coef) {
  const std::size_t n = s.size();
  coef.assign(n, 0.0);
  if (risk == Risk::softmax) {
    double m = s[0] / tau;
    for (double v : s) m = std::max(m, v / tau);
    double z = 0;
    for (double v : s) z += std::exp(v / tau - m);
    const double lse = m + std::log(z);
    for (std::size_t j = 0; j < n; ++j) coef[j] = std::exp(s[j] / tau - lse) / tau;
    coef[0] -= 1.0 / tau;
    return lse - s[0] / tau;
  }
  const double inv = 1.0 / (double(n - 1) * tau);
  double loss = 0;
  for (std::size_t j = 1; j < n; ++j) {
    const double x = (s[j] - s[0]) / tau;
    loss += x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    const double sig = 1.0 / (1.0 + std::exp(-x));
    coef[j] = sig * inv;
    coef[0] -= sig * inv;
  }
  return loss / double(n - 1);
}

template <typename Real>
struct Scorer {
  std::size_t d;
  double tau;
  Risk risk;
  std::vector<double> s, coef;

  // Loss of one anchor against candidates (positive first). Adds
  // gscale * gradient into the sinks when gscale != 0.
  double operator()(const View<Real>& a, Sink<Real> ga, const std::vector<View<Real>>& xs,
                    const std::vector<Sink<Real>>& gx, double gscale) {
    const auto& k = simd::active<Real>();
    const double na = std::sqrt(a.sq);
    if (!(na > 0)) fail(ErrorCode::numeric, "cosine of a zero-norm anchor");
    s.resize(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const auto& x = xs[j];
      const double nx = std::sqrt(x.sq);
      if (!(nx > 0)) fail(ErrorCode::numeric, "cosine of a zero-norm candidate");
      double dot = double(k.dot(a.r, x.r, d));
      if (a.p) dot += double(k.dot(a.p, x.p, d));
      s[j] = dot / (na * nx);
    }
    const double loss = risk_and_coefs(risk, s, tau, coef);
    if (gscale == 0) return loss;
    double self = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const auto& x = xs[j];
      const double c = gscale * coef[j];
      if (c == 0) continue;
      const double nx = std::sqrt(x.sq);
      const Real cross = static_cast<Real>(c / (na * nx));
      const Real own = static_cast<Real>(-c * s[j] / x.sq);
      self += c * s[j];
      if (ga.r) k.axpy(cross, x.r, ga.r, d);
      if (ga.p && a.p) k.axpy(cross, x.p, ga.p, d);
      const auto& g = gx[j];
      if (g.r) {
        k.axpy(cross, a.r, g.r, d);
        k.axpy(own, x.r, g.r, d);
      }
      if (g.p && a.p) {
        k.axpy(cross, a.p, g.p, d);
        k.axpy(own, x.p, g.p, d);
      }
    }
    const Real shrink = static_cast<Real>(-self / a.sq);
    if (ga.r) k.axpy(shrink, a.r, ga.r, d);
    if (ga.p && a.p) k.axpy(shrink, a.p, ga.p, d);
    return loss;
  }
};

template <typename Real>
Real* row_or_null(EmbeddingGrads<Real>* g, Matrix<Real> EmbeddingGrads<Real>::*m, std::size_t r) {
  return g ? (g->*m).row(r).data() : nullptr;
}

template <typename Real>
View<Real> single(std::span<const Real> v) {
  return {v.data(), nullptr, double(simd::dot<Real>(v, v))};
}

template <typename Real>
double span_risk(Risk risk, std::span<const Real> anchor, std::span<const Real> positive,
                 const std::vector<std::span<const Real>>& negatives, double tau) {
  if (negatives.empty()) fail(ErrorCode::invalid_input, "risk needs at least one negative");
  if (!(tau > 0)) fail(ErrorCode::config, "tau must be > 0");
  std::vector<View<Real>> xs{single(positive)};
  for (auto n : negatives) xs.push_back(single(n));
  Scorer<Real> score{anchor.size(), tau, risk, {}, {}};
  return score(single(anchor), {}, xs, {}, 0.0);
}

std::atomic<bool> g_warned_group_fallback{false};
std::atomic<bool> g_warned_small_dcor{false};

void warn_once(std::atomic<bool>& flag, const std::string& msg) {
  if (!flag.exchange(true)) spdlog::warn("{}", msg);
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void permute(const std::vector<Index>& members, std::vector<Index>& source, std::mt19937_64& rng) {
  auto perm = members;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t k = 0; k < members.size(); ++k) source[members[k]] = perm[k];
}

// Returns false if some member had an empty pool.
bool draw_from_groups(const std::vector<Index>& members,
                      const std::vector<dataio::PopularityGroup>& group_of, Augmentation strategy,
                      std::vector<Index>& source, std::mt19937_64& rng) {
  std::array<std::vector<Index>, 3> pools;
  for (std::size_t e = 0; e < group_of.size(); ++e) {
    pools[static_cast<std::size_t>(group_of[e])].push_back(static_cast<Index>(e));
  }
  const auto head = static_cast<std::size_t>(dataio::PopularityGroup::head);
  const auto tail = static_cast<std::size_t>(dataio::PopularityGroup::tail);
  for (auto m : members) {
    std::array<const std::vector<Index>*, 2> use{nullptr, nullptr};
    if (strategy == Augmentation::head_group) {
      use[0] = &pools[head];
    } else if (strategy == Augmentation::tail_group) {
      use[0] = &pools[tail];
    } else {
      const auto own = static_cast<std::size_t>(group_of[m]);
      use[0] = &pools[(own + 1) % 3];
      use[1] = &pools[(own + 2) % 3];
    }
    std::size_t total = use[0]->size() + (use[1] ? use[1]->size() : 0);
    if (total == 0) return false;
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
    source[m] = pick < use[0]->size() ? (*use[0])[pick] : (*use[1])[pick - use[0]->size()];
  }
  return true;
}

template <typename Real>
void check_finite(const Matrix<Real>& m, const char* what) {
  for (Real v : m.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::numeric, std::string("non-finite gradient in ") + what);
  }
}

template <typename Real>
void scatter_rows(const Matrix<Real>& g, const std::vector<Index>& rows, double scale,
                  Matrix<Real>& into) {
  const auto& k = simd::active<Real>();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    k.axpy(static_cast<Real>(scale), g.row(r).data(), into.row(rows[r]).data(), g.cols());
  }
}

template <typename Real>
Matrix<Real> gather_rows(const Matrix<Real>& table, const std::vector<Index>& rows) {
  Matrix<Real> out(rows.size(), table.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(table.row(rows[r]).data(), table.cols(), out.row(r).data());
  }
  return out;
}

}  // namespace

template <typename Real>
double cosine_sim(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) fail(ErrorCode::invalid_input, "cosine_sim: length mismatch");
  const double na = std::sqrt(double(simd::dot<Real>(a, a)));
  const double nb = std::sqrt(double(simd::dot<Real>(b, b)));
  if (!(na > 0) || !(nb > 0)) fail(ErrorCode::numeric, "cosine_sim of a zero vector");
  return double(simd::dot<Real>(a, b)) / (na * nb);
}

template <typename Real>
double softmax_loss(std::span<const Real> anchor, std::span<const Real> positive,
                    const std::vector<std::span<const Real>>& negatives, double tau) {
  return span_risk(Risk::softmax, anchor, positive, negatives, tau);
}

template <typename Real>
double bpr_loss(std::span<const Real> anchor, std::span<const Real> positive,
                const std::vector<std::span<const Real>>& negatives, double tau) {
  return span_risk(Risk::bpr, anchor, positive, negatives, tau);
}

void StepBatch::validate(std::size_t n_users, std::size_t n_items) const {
  if (users.empty()) fail(ErrorCode::invalid_input, "empty batch");
  if (items.size() != users.size()) fail(ErrorCode::invalid_input, "batch user/item lengths differ");
  if (n_negatives == 0) fail(ErrorCode::invalid_input, "batch has no negatives");
  if (negatives.size() != users.size() * n_negatives) {
    fail(ErrorCode::invalid_input, "negatives do not match batch size");
  }
  if (!weights.empty() && weights.size() != users.size()) {
    fail(ErrorCode::invalid_input, "weights do not match batch size");
  }
  for (auto u : users) {
    if (u >= n_users) fail(ErrorCode::index, "batch user out of range");
  }
  for (const auto* list : {&items, &negatives}) {
    for (auto i : *list) {
      if (i >= n_items) fail(ErrorCode::index, "batch item out of range");
    }
  }
}

std::vector<Index> unique_users(const StepBatch& batch) { return sorted_unique(batch.users); }
std::vector<Index> unique_positive_items(const StepBatch& batch) {
  return sorted_unique(batch.items);
}

EntityGroups EntityGroups::from_stats(const dataio::PopularityStats& stats) {
  return {dataio::third_partition(stats.user_counts), dataio::third_partition(stats.item_counts)};
}

AugmentPlan identity_plan(std::size_t n_users, std::size_t n_items) {
  AugmentPlan plan;
  plan.user_source.resize(n_users);
  plan.item_source.resize(n_items);
  for (std::size_t u = 0; u < n_users; ++u) plan.user_source[u] = static_cast<Index>(u);
  for (std::size_t i = 0; i < n_items; ++i) plan.item_source[i] = static_cast<Index>(i);
  return plan;
}

AugmentPlan plan_augmentation(const StepBatch& batch, std::size_t n_users, std::size_t n_items,
                              Augmentation strategy, const EntityGroups* groups,
                              std::mt19937_64& rng) {
  AugmentPlan plan = identity_plan(n_users, n_items);
  const auto users = unique_users(batch);
  std::vector<Index> all_items = batch.items;
  all_items.insert(all_items.end(), batch.negatives.begin(), batch.negatives.end());
  const auto items = sorted_unique(std::move(all_items));
  if (strategy == Augmentation::random_permutation) {
    permute(users, plan.user_source, rng);
    permute(items, plan.item_source, rng);
    return plan;
  }
  if (groups == nullptr || groups->users.size() != n_users || groups->items.size() != n_items) {
    fail(ErrorCode::config, std::string(to_string(strategy)) + " needs popularity groups");
  }
  if (!draw_from_groups(users, groups->users, strategy, plan.user_source, rng)) {
    warn_once(g_warned_group_fallback, "empty popularity group; falling back to permutation");
    plan.user_source = identity_plan(n_users, 0).user_source;
    permute(users, plan.user_source, rng);
  }
  if (!draw_from_groups(items, groups->items, strategy, plan.item_source, rng)) {
    warn_once(g_warned_group_fallback, "empty popularity group; falling back to permutation");
    plan.item_source = identity_plan(0, n_items).item_source;
    permute(items, plan.item_source, rng);
  }
  return plan;
}

template <typename Real>
EmbeddingBatch<Real> augment_batch(const Embeddings<Real>& all, const MemoryBanks<Real>& banks,
                                   std::span<const Index> user_ids,
                                   std::span<const Index> item_ids, const AugmentPlan& plan) {
  std::vector<Index> us(user_ids.size()), is(item_ids.size());
  for (std::size_t k = 0; k < us.size(); ++k) us[k] = plan.user_source.at(user_ids[k]);
  for (std::size_t k = 0; k < is.size(); ++k) is[k] = plan.item_source.at(item_ids[k]);
  auto out = encoders::gather_batch(all, user_ids, item_ids);
  const std::size_t d = out.u_r.cols();
  for (std::size_t k = 0; k < us.size(); ++k) {
    std::copy_n(banks.users->row(us[k]).data(), d, out.u_p.row(k).data());
    std::copy_n(banks.users->row(us[k]).data(), d, out.u.row(k).data() + d);
    std::copy_n(banks.items->row(is[k]).data(), d, out.i_p.row(k).data());
    std::copy_n(banks.items->row(is[k]).data(), d, out.i.row(k).data() + d);
  }
  return out;
}

template <typename Real>
double rep_loss(const Embeddings<Real>& all, const StepBatch& batch, const LossConfig& cfg,
                Risk risk, EmbeddingGrads<Real>* grads, double scale, LossBreakdown* parts) {
  using G = EmbeddingGrads<Real>;
  const std::size_t n = batch.size();
  if (n == 0) fail(ErrorCode::invalid_input, "empty batch");
  Scorer<Real> score{all.user_pref.cols(), cfg.tau, risk, {}, {}};
  std::vector<View<Real>> xs;
  std::vector<Sink<Real>> gx;
  double pref = 0, pop = 0;
  for (int half = 0; half < 2; ++half) {
    const bool is_pop = half == 1;
    if (is_pop && cfg.alpha == 0) break;
    const auto& ut = is_pop ? all.user_pop : all.user_pref;
    const auto& it = is_pop ? all.item_pop : all.item_pref;
    const auto& usq = is_pop ? all.user_pop_sq : all.user_pref_sq;
    const auto& isq = is_pop ? all.item_pop_sq : all.item_pref_sq;
    const auto um = is_pop ? &G::user_pop : &G::user_pref;
    const auto im = is_pop ? &G::item_pop : &G::item_pref;
    const double weight = scale * (is_pop ? cfg.alpha : 1.0) / double(n);
    double sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Index u = batch.users[k];
      xs.clear();
      gx.clear();
      auto add = [&](Index i) {
        xs.push_back({it.row(i).data(), nullptr, double(isq[i])});
        gx.push_back({row_or_null(grads, im, i), nullptr});
      };
      add(batch.items[k]);
      for (auto j : batch.negatives_of(k)) add(j);
      const double w = batch.weight(k);
      sum += w * score({ut.row(u).data(), nullptr, double(usq[u])},
                       {row_or_null(grads, um, u), nullptr}, xs, gx,
                       grads ? weight * w : 0.0);
    }
    (is_pop ? pop : pref) = sum / double(n);
  }
  if (parts) {
    parts->rep_pref = pref;
    parts->rep_pop = pop;
  }
  return pref + cfg.alpha * pop;
}

template <typename Real>
double aug_loss(const Embeddings<Real>& all, const StepBatch& batch,
                std::span<const AugmentPlan> draws, double tau, Risk risk,
                EmbeddingGrads<Real>* grads, double scale) {
  using G = EmbeddingGrads<Real>;
  const std::size_t n = batch.size();
  if (n == 0) fail(ErrorCode::invalid_input, "empty batch");
  if (draws.empty()) fail(ErrorCode::invalid_input, "augmentation needs at least one draw");
  Scorer<Real> score{all.user_pref.cols(), tau, risk, {}, {}};
  const double weight = scale / (double(n) * double(draws.size()));
  std::vector<View<Real>> xs;
  std::vector<Sink<Real>> gx;
  double total = 0;
  for (const auto& plan : draws) {
    for (int side = 0; side < 2; ++side) {
      const bool swap_user = side == 0;
      double sum = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const Index u = batch.users[k];
        const Index up = swap_user ? plan.user_source[u] : u;
        xs.clear();
        gx.clear();
        auto add = [&](Index i) {
          const Index ip = swap_user ? i : plan.item_source[i];
          xs.push_back({all.item_pref.row(i).data(), all.item_pop.row(ip).data(),
                        double(all.item_pref_sq[i]) + double(all.item_pop_sq[ip])});
          gx.push_back({row_or_null(grads, &G::item_pref, i), row_or_null(grads, &G::item_pop, ip)});
        };
        add(batch.items[k]);
        for (auto j : batch.negatives_of(k)) add(j);
        const View<Real> a{all.user_pref.row(u).data(), all.user_pop.row(up).data(),
                           double(all.user_pref_sq[u]) + double(all.user_pop_sq[up])};
        const double w = batch.weight(k);
        sum += w * score(a, {row_or_null(grads, &G::user_pref, u), row_or_null(grads, &G::user_pop, up)},
                         xs, gx, grads ? weight * w : 0.0);
      }
      total += sum / double(n);
    }
  }
  return total / double(draws.size());
}

template <typename Real>
double dis_loss(const Embeddings<Real>& all, const StepBatch& batch, const LossConfig& cfg,
                EmbeddingGrads<Real>* grads, double scale, LossBreakdown* parts) {
  double sides[2] = {0, 0};
  for (int side = 0; side < 2; ++side) {
    const bool users = side == 0;
    const auto rows = users ? unique_users(batch) : unique_positive_items(batch);
    if (cfg.discrepancy == Discrepancy::dcor && rows.size() < 2) {
      warn_once(g_warned_small_dcor, "batch has fewer than 2 distinct entities; dCor term skipped");
      continue;
    }
    if (rows.empty()) continue;
    const auto x = gather_rows(users ? all.user_pref : all.item_pref, rows);
    const auto y = gather_rows(users ? all.user_pop : all.item_pop, rows);
    const auto r = discrepancy_with_grad(cfg.discrepancy, x, y, cfg.mmd_bandwidth);
    sides[side] = r.value;
    if (grads) {
      scatter_rows(r.grad_x, rows, scale, users ? grads->user_pref : grads->item_pref);
      scatter_rows(r.grad_y, rows, scale, users ? grads->user_pop : grads->item_pop);
    }
  }
  if (parts) {
    parts->dis_user = sides[0];
    parts->dis_item = sides[1];
  }
  return sides[0] + sides[1];
}

template <typename Real>
LossBreakdown joint_loss(const Embeddings<Real>& all, const StepBatch& batch,
                         const LossConfig& cfg, Risk risk, const EntityGroups* groups,
                         std::mt19937_64& rng, EmbeddingGrads<Real>* grads) {
  cfg.validate();
  batch.validate(all.user_pref.rows(), all.item_pref.rows());
  LossBreakdown parts;
  parts.rep = rep_loss(all, batch, cfg, risk, grads, 1.0, &parts);
  if (cfg.lambda1 > 0) {
    std::vector<AugmentPlan> draws;
    for (std::uint32_t t = 0; t < cfg.aug_draws; ++t) {
      draws.push_back(plan_augmentation(batch, all.user_pref.rows(), all.item_pref.rows(),
                                        cfg.augmentation, groups, rng));
    }
    parts.aug = aug_loss<Real>(all, batch, draws, cfg.tau, risk, grads, cfg.lambda1);
  }
  if (cfg.lambda2 > 0) parts.dis = dis_loss(all, batch, cfg, grads, cfg.lambda2, &parts);
  parts.total = parts.rep + cfg.lambda1 * parts.aug + cfg.lambda2 * parts.dis;
  if (!std::isfinite(parts.total)) fail(ErrorCode::numeric, "non-finite loss");
  if (grads) {
    check_finite(grads->user_pref, "user preference");
    check_finite(grads->item_pref, "item preference");
    check_finite(grads->user_pop, "user popularity");
    check_finite(grads->item_pop, "item popularity");
  }
  return parts;
}

#define INVCF_INSTANTIATE(Real)                                                                  \
  template double cosine_sim(std::span<const Real>, std::span<const Real>);                      \
  template double softmax_loss(std::span<const Real>, std::span<const Real>,                     \
                               const std::vector<std::span<const Real>>&, double);               \
  template double bpr_loss(std::span<const Real>, std::span<const Real>,                         \
                           const std::vector<std::span<const Real>>&, double);                   \
  template EmbeddingBatch<Real> augment_batch(const Embeddings<Real>&, const MemoryBanks<Real>&, \
                                              std::span<const Index>, std::span<const Index>,    \
                                              const AugmentPlan&);                               \
  template double rep_loss(const Embeddings<Real>&, const StepBatch&, const LossConfig&, Risk,   \
                           EmbeddingGrads<Real>*, double, LossBreakdown*);                       \
  template double aug_loss(const Embeddings<Real>&, const StepBatch&,                            \
                           std::span<const AugmentPlan>, double, Risk, EmbeddingGrads<Real>*,    \
                           double);                                                              \
  template double dis_loss(const Embeddings<Real>&, const StepBatch&, const LossConfig&,         \
                           EmbeddingGrads<Real>*, double, LossBreakdown*);                       \
  template LossBreakdown joint_loss(const Embeddings<Real>&, const StepBatch&, const LossConfig&, \
                                    Risk, const EntityGroups*, std::mt19937_64&,                 \
                                    EmbeddingGrads<Real>*);

INVCF_INSTANTIATE(float)
INVCF_INSTANTIATE(double)
#undef INVCF_INSTANTIATE

}  // namespace invcf::losses
