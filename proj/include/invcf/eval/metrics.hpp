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
#include <vector>

#include <json.hpp>

#include "invcf/dataio/dataset.hpp"
#include "invcf/encoders/encoder.hpp"

namespace invcf::eval {

using dataio::Index;

struct UserMetrics {
  double hr = 0;
  double recall = 0;
  double ndcg = 0;
};

struct EvalResult {
  std::size_t k = 20;
  double hr = 0;
  double recall = 0;
  double ndcg = 0;
  std::size_t n_users = 0;

  nlohmann::json to_json() const;
  static EvalResult from_json(const nlohmann::json& j);
};

/// Binary-gain HR/Recall/NDCG of the first K entries of `ranking`.
/// `positives` need not be sorted; an empty set is an invalid-input error.
UserMetrics metrics_at_k(std::span<const Index> ranking, std::span<const Index> positives,
                         std::size_t k);

/// Cosine scores of one user against every item (preference halves only).
/// Zero-norm vectors score 0.
template <typename Real>
void score_items(const encoders::Embeddings<Real>& pref, Index user, std::vector<double>& out);

/// Items by descending score, ties by ascending index, `exclude` (sorted)
/// removed. Truncated to `limit` entries when limit > 0.
std::vector<Index> rank_by_score(std::span<const double> scores, std::span<const Index> exclude,
                                 std::size_t limit = 0);

/// Full ranking of one user's candidates from a model.
template <typename Real>
std::vector<Index> rank_items(const encoders::ModelParams<Real>& params,
                              const encoders::InteractionGraph* graph, Index user,
                              std::span<const Index> exclude);

struct EvalOptions {
  std::vector<std::size_t> ks{20};
  bool exclude_train = true;
  // Extra positives to drop from the candidates (e.g. validation).
  const dataio::InteractionDataset* also_exclude = nullptr;
  // 0 means thread_budget().
  unsigned threads = 0;
};

/// One result per K. Per-user metrics are averaged in user order over the
/// users with at least one test positive and at least one candidate.
template <typename Real>
std::vector<EvalResult> evaluate(const encoders::ModelParams<Real>& params,
                                 const encoders::InteractionGraph* graph,
                                 const dataio::InteractionDataset& test,
                                 const dataio::InteractionDataset& train,
                                 const EvalOptions& options = {});

/// Per-user top-max(K) lists, for invariance checks. Users without test
/// positives get an empty list.
template <typename Real>
std::vector<std::vector<Index>> top_k_lists(const encoders::ModelParams<Real>& params,
                                            const encoders::InteractionGraph* graph,
                                            const dataio::InteractionDataset& test,
                                            const dataio::InteractionDataset& train,
                                            const EvalOptions& options = {});

}  // namespace invcf::eval
