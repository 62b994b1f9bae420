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

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "invcf/dataio/popularity.hpp"
#include "invcf/encoders/encoder.hpp"
#include "invcf/losses/config.hpp"

namespace invcf::losses {

using dataio::Index;
using encoders::EmbeddingBatch;
using encoders::EmbeddingGrads;
using encoders::Embeddings;

/// Throws a numeric error if either vector has zero norm.
template <typename Real>
double cosine_sim(std::span<const Real> a, std::span<const Real> b);

/// -log softmax of the positive among {positive} + negatives, on cosine / tau.
template <typename Real>
double softmax_loss(std::span<const Real> anchor, std::span<const Real> positive,
                    const std::vector<std::span<const Real>>& negatives, double tau);

/// Mean over negatives of softplus(-(s_pos - s_neg) / tau), cosine scores.
template <typename Real>
double bpr_loss(std::span<const Real> anchor, std::span<const Real> positive,
                const std::vector<std::span<const Real>>& negatives, double tau);

enum class Risk { softmax, bpr };

/// One optimization step's examples. Row k is the positive (users[k],
/// items[k]) with negatives[k * n_negatives, (k + 1) * n_negatives).
struct StepBatch {
  std::vector<Index> users;
  std::vector<Index> items;
  std::size_t n_negatives = 0;
  std::vector<Index> negatives;
  // Per-example multipliers on every risk term; empty means all 1.
  std::vector<double> weights;

  std::size_t size() const noexcept { return users.size(); }
  std::span<const Index> negatives_of(std::size_t k) const {
    return {negatives.data() + k * n_negatives, n_negatives};
  }
  double weight(std::size_t k) const { return weights.empty() ? 1.0 : weights[k]; }
  void validate(std::size_t n_users, std::size_t n_items) const;
};

/// Sorted distinct users of the batch, and sorted distinct positive items.
std::vector<Index> unique_users(const StepBatch& batch);
std::vector<Index> unique_positive_items(const StepBatch& batch);

/// Head/mid/tail membership from training counts, shared with analysis.
struct EntityGroups {
  std::vector<dataio::PopularityGroup> users;
  std::vector<dataio::PopularityGroup> items;

  static EntityGroups from_stats(const dataio::PopularityStats& stats);
};

/// Memory banks are the current popularity outputs for every entity.
template <typename Real>
struct MemoryBanks {
  const Matrix<Real>* users;
  const Matrix<Real>* items;

  static MemoryBanks of(const Embeddings<Real>& all) { return {&all.user_pop, &all.item_pop}; }
};

/// Which bank row stands in for each entity's popularity half. Entities not
/// in the batch map to themselves. Items cover positives and negatives.
struct AugmentPlan {
  std::vector<Index> user_source;
  std::vector<Index> item_source;
};

AugmentPlan identity_plan(std::size_t n_users, std::size_t n_items);

/// One bank draw. Group strategies need `groups`; an empty source group
/// falls back to an in-batch permutation with a warning.
AugmentPlan plan_augmentation(const StepBatch& batch, std::size_t n_users, std::size_t n_items,
                              Augmentation strategy, const EntityGroups* groups,
                              std::mt19937_64& rng);

/// u* = u_r | bank_u[source(u)], i* = i_r | bank_i[source(i)]; u_p and i_p
/// hold the substituted rows, preference halves are copied unchanged.
template <typename Real>
EmbeddingBatch<Real> augment_batch(const Embeddings<Real>& all, const MemoryBanks<Real>& banks,
                                   std::span<const Index> user_ids,
                                   std::span<const Index> item_ids, const AugmentPlan& plan);

struct LossBreakdown {
  double total = 0;
  double rep_pref = 0;
  double rep_pop = 0;
  double rep = 0;
  double aug = 0;
  double dis_user = 0;
  double dis_item = 0;
  double dis = 0;
};

/// Each term returns its value and, when `grads` is non-null, adds
/// scale * d(term)/d(embeddings) into it.
template <typename Real>
double rep_loss(const Embeddings<Real>& all, const StepBatch& batch, const LossConfig& cfg,
                Risk risk, EmbeddingGrads<Real>* grads, double scale = 1.0,
                LossBreakdown* parts = nullptr);

template <typename Real>
double aug_loss(const Embeddings<Real>& all, const StepBatch& batch,
                std::span<const AugmentPlan> draws, double tau, Risk risk,
                EmbeddingGrads<Real>* grads, double scale = 1.0);

template <typename Real>
double dis_loss(const Embeddings<Real>& all, const StepBatch& batch, const LossConfig& cfg,
                EmbeddingGrads<Real>* grads, double scale = 1.0,
                LossBreakdown* parts = nullptr);

/// L_rep + lambda1 L_aug + lambda2 L_dis. Terms with zero weight are skipped
/// outright, including their RNG draws. Throws a numeric error on a
/// non-finite loss or gradient.
template <typename Real>
LossBreakdown joint_loss(const Embeddings<Real>& all, const StepBatch& batch,
                         const LossConfig& cfg, Risk risk, const EntityGroups* groups,
                         std::mt19937_64& rng, EmbeddingGrads<Real>* grads);

}  // namespace invcf::losses
