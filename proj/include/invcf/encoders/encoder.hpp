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
#include <span>
#include <vector>

#include "invcf/dataio/dataset.hpp"
#include "invcf/encoders/model.hpp"
#include "invcf/matrix.hpp"

namespace invcf::encoders {

/// Symmetric bipartite graph over nodes [users..., items...] with the
/// propagation operator D^-1/2 A D^-1/2 in CSR form.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  static InteractionGraph build(const dataio::InteractionDataset& train);

  std::size_t n_users() const noexcept { return n_users_; }
  std::size_t n_items() const noexcept { return n_items_; }
  std::size_t n_nodes() const noexcept { return n_users_ + n_items_; }
  const std::vector<std::uint64_t>& degrees() const noexcept { return degrees_; }

  /// out = operator * in, both (n_nodes x dim). Zero-degree rows come out zero.
  template <typename Real>
  void propagate(const Matrix<Real>& in, Matrix<Real>& out) const;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::vector<std::uint64_t> degrees_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> weights_;
};

/// Final per-entity representations for one parameter state: what the
/// preference and popularity encoders output for every user and item.
/// Squared row norms are cached for the cosine scorer.
template <typename Real>
struct Embeddings {
  Matrix<Real> user_pref;
  Matrix<Real> item_pref;
  Matrix<Real> user_pop;
  Matrix<Real> item_pop;
  std::vector<Real> user_pref_sq;
  std::vector<Real> item_pref_sq;
  std::vector<Real> user_pop_sq;
  std::vector<Real> item_pop_sq;

  void refresh_norms();
};

/// Gradients w.r.t. the final representations (same shapes as Embeddings).
template <typename Real>
struct EmbeddingGrads {
  Matrix<Real> user_pref;
  Matrix<Real> item_pref;
  Matrix<Real> user_pop;
  Matrix<Real> item_pop;

  static EmbeddingGrads zeros_like(const Embeddings<Real>& e);
};

/// Gradients w.r.t. the four parameter tables.
template <typename Real>
struct ParamGrads {
  Matrix<Real> pref_user;
  Matrix<Real> pref_item;
  Matrix<Real> pop_user;
  Matrix<Real> pop_item;
};

/// MF: table lookups. LightGCN: both encoders propagate their base rows
/// (popularity rows scattered from category to entity first) and average
/// layers 0..L. `graph` is ignored for MF.
template <typename Real>
Embeddings<Real> encode_all(const ModelParams<Real>& params, const InteractionGraph* graph);

/// Preference representations only (the inference path); popularity tables
/// are never read. Fills user_pref/item_pref and their norms.
template <typename Real>
Embeddings<Real> encode_preference(const ModelParams<Real>& params, const InteractionGraph* graph);

/// Adjoint of encode_all.
template <typename Real>
ParamGrads<Real> backpropagate(const ModelParams<Real>& params, const InteractionGraph* graph,
                               const EmbeddingGrads<Real>& grads);

/// Per-pair batch view: rows k of u_r, i_r, u_p, i_p belong to
/// (user_ids[k], item_ids[k]); u and i are the concatenations u_r|u_p, i_r|i_p.
template <typename Real>
struct EmbeddingBatch {
  Matrix<Real> u_r, i_r, u_p, i_p;
  Matrix<Real> u, i;
};

template <typename Real>
EmbeddingBatch<Real> gather_batch(const Embeddings<Real>& all, std::span<const Index> user_ids,
                                  std::span<const Index> item_ids);

template <typename Real>
EmbeddingBatch<Real> mf_forward(const ModelParams<Real>& params, std::span<const Index> user_ids,
                                std::span<const Index> item_ids);

template <typename Real>
EmbeddingBatch<Real> lightgcn_forward(const ModelParams<Real>& params,
                                      const InteractionGraph& graph,
                                      std::span<const Index> user_ids,
                                      std::span<const Index> item_ids);

}  // namespace invcf::encoders
