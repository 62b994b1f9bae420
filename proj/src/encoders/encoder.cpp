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

#include "invcf/encoders/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "invcf/error.hpp"
#include "invcf/simd/kernels.hpp"

namespace invcf::encoders {

InteractionGraph InteractionGraph::build(const dataio::InteractionDataset& train) {
  InteractionGraph g;
  g.n_users_ = train.n_users();
  g.n_items_ = train.n_items();
  const std::size_t n = g.n_nodes();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& r : train.records()) {
    adj[r.user].push_back(static_cast<std::uint32_t>(g.n_users_ + r.item));
    adj[g.n_users_ + r.item].push_back(r.user);
  }
  g.degrees_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& a = adj[v];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    g.degrees_[v] = a.size();
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + adj[v].size();
  g.neighbors_.reserve(g.offsets_[n]);
  g.weights_.reserve(g.offsets_[n]);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : adj[v]) {
      g.neighbors_.push_back(w);
      g.weights_.push_back(1.0 / std::sqrt(double(g.degrees_[v]) * double(g.degrees_[w])));
    }
  }
  return g;
}

template <typename Real>
void InteractionGraph::propagate(const Matrix<Real>& in, Matrix<Real>& out) const {
  if (in.rows() != n_nodes()) fail(ErrorCode::invalid_input, "propagate: row count != node count");
  out = Matrix<Real>(in.rows(), in.cols());
  const auto& k = simd::active<Real>();
  for (std::size_t v = 0; v < n_nodes(); ++v) {
    Real* dst = out.row(v).data();
    for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
      k.axpy(static_cast<Real>(weights_[e]), in.row(neighbors_[e]).data(), dst, in.cols());
    }
  }
}

template void InteractionGraph::propagate<float>(const Matrix<float>&, Matrix<float>&) const;
template void InteractionGraph::propagate<double>(const Matrix<double>&, Matrix<double>&) const;

namespace {

template <typename Real>
void squared_norms(const Matrix<Real>& m, std::vector<Real>& out) {
  const auto& k = simd::active<Real>();
  out.resize(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const Real* p = m.row(r).data();
    out[r] = k.dot(p, p, m.cols());
  }
}

template <typename Real>
Matrix<Real> scatter_categories(const Matrix<Real>& table, const std::vector<std::uint32_t>& cat) {
  Matrix<Real> out(cat.size(), table.cols());
  for (std::size_t e = 0; e < cat.size(); ++e) {
    std::copy_n(table.row(cat[e]).data(), table.cols(), out.row(e).data());
  }
  return out;
}

// Stacks users over items into one node matrix and back.
template <typename Real>
Matrix<Real> stack(const Matrix<Real>& users, const Matrix<Real>& items) {
  Matrix<Real> out(users.rows() + items.rows(), users.cols());
  std::copy(users.values().begin(), users.values().end(), out.values().begin());
  std::copy(items.values().begin(), items.values().end(),
            out.values().begin() + std::ptrdiff_t(users.values().size()));
  return out;
}

template <typename Real>
void unstack(const Matrix<Real>& nodes, Matrix<Real>& users, Matrix<Real>& items,
             std::size_t n_users) {
  const std::size_t d = nodes.cols();
  users = Matrix<Real>(n_users, d);
  items = Matrix<Real>(nodes.rows() - n_users, d);
  const auto split = nodes.values().begin() + std::ptrdiff_t(n_users * d);
  std::copy(nodes.values().begin(), split, users.values().begin());
  std::copy(split, nodes.values().end(), items.values().begin());
}

// mean_{l=0..L} op^l x; op is symmetric so this is also its own adjoint.
template <typename Real>
Matrix<Real> layer_mean(const InteractionGraph& graph, const Matrix<Real>& x, std::uint32_t L) {
  if (L == 0) return x;
  const auto& k = simd::active<Real>();
  Matrix<Real> sum = x;
  Matrix<Real> cur = x;
  Matrix<Real> next;
  for (std::uint32_t l = 0; l < L; ++l) {
    graph.propagate(cur, next);
    k.axpy(Real(1), next.values().data(), sum.values().data(), sum.values().size());
    std::swap(cur, next);
  }
  const Real scale = Real(1) / Real(L + 1);
  for (auto& v : sum.values()) v *= scale;
  return sum;
}

template <typename Real>
void check_graph(const ModelParams<Real>& params, const InteractionGraph* graph) {
  if (params.backbone != Backbone::lightgcn || params.layers == 0) return;
  if (graph == nullptr) fail(ErrorCode::config, "LightGCN needs an interaction graph");
  if (graph->n_users() != params.n_users() || graph->n_items() != params.n_items()) {
    fail(ErrorCode::invalid_input, "graph shape does not match the model");
  }
}

template <typename Real>
void check_ids(std::span<const Index> ids, std::size_t n, const char* kind) {
  for (auto id : ids) {
    if (id >= n) fail(ErrorCode::index, std::string(kind) + " index " + std::to_string(id) + " out of range");
  }
}

template <typename Real>
void copy_row(const Matrix<Real>& src, std::size_t r, Matrix<Real>& dst, std::size_t k,
              std::size_t offset = 0) {
  std::copy_n(src.row(r).data(), src.cols(), dst.row(k).data() + offset);
}

template <typename Real>
EmbeddingBatch<Real> batch_from(const Matrix<Real>& up_tab, const Matrix<Real>& ip_tab,
                                const Matrix<Real>& upop_tab, const Matrix<Real>& ipop_tab,
                                const std::vector<std::uint32_t>* ucat,
                                const std::vector<std::uint32_t>* icat,
                                std::span<const Index> users, std::span<const Index> items) {
  if (users.size() != items.size()) fail(ErrorCode::invalid_input, "user/item id lists differ in length");
  check_ids<Real>(users, up_tab.rows(), "user");
  check_ids<Real>(items, ip_tab.rows(), "item");
  const std::size_t n = users.size();
  const std::size_t d = up_tab.cols();
  EmbeddingBatch<Real> b{Matrix<Real>(n, d), Matrix<Real>(n, d), Matrix<Real>(n, d),
                         Matrix<Real>(n, d), Matrix<Real>(n, 2 * d), Matrix<Real>(n, 2 * d)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t u = users[k], i = items[k];
    const std::size_t pu = ucat ? (*ucat)[u] : u;
    const std::size_t pi = icat ? (*icat)[i] : i;
    copy_row(up_tab, u, b.u_r, k);
    copy_row(ip_tab, i, b.i_r, k);
    copy_row(upop_tab, pu, b.u_p, k);
    copy_row(ipop_tab, pi, b.i_p, k);
    copy_row(up_tab, u, b.u, k);
    copy_row(upop_tab, pu, b.u, k, d);
    copy_row(ip_tab, i, b.i, k);
    copy_row(ipop_tab, pi, b.i, k, d);
  }
  return b;
}

}  // namespace

template <typename Real>
void Embeddings<Real>::refresh_norms() {
  squared_norms(user_pref, user_pref_sq);
  squared_norms(item_pref, item_pref_sq);
  squared_norms(user_pop, user_pop_sq);
  squared_norms(item_pop, item_pop_sq);
}

template <typename Real>
EmbeddingGrads<Real> EmbeddingGrads<Real>::zeros_like(const Embeddings<Real>& e) {
  return {Matrix<Real>(e.user_pref.rows(), e.user_pref.cols()),
          Matrix<Real>(e.item_pref.rows(), e.item_pref.cols()),
          Matrix<Real>(e.user_pop.rows(), e.user_pop.cols()),
          Matrix<Real>(e.item_pop.rows(), e.item_pop.cols())};
}

template <typename Real>
Embeddings<Real> encode_all(const ModelParams<Real>& params, const InteractionGraph* graph) {
  check_graph(params, graph);
  Embeddings<Real> e;
  e.user_pop = scatter_categories(params.pop_user, params.user_category_of);
  e.item_pop = scatter_categories(params.pop_item, params.item_category_of);
  if (params.backbone == Backbone::mf || params.layers == 0) {
    e.user_pref = params.pref_user;
    e.item_pref = params.pref_item;
  } else {
    const auto pref = layer_mean(*graph, stack(params.pref_user, params.pref_item), params.layers);
    unstack(pref, e.user_pref, e.item_pref, params.n_users());
    const auto pop = layer_mean(*graph, stack(e.user_pop, e.item_pop), params.layers);
    unstack(pop, e.user_pop, e.item_pop, params.n_users());
  }
  e.refresh_norms();
  return e;
}

template <typename Real>
Embeddings<Real> encode_preference(const ModelParams<Real>& params, const InteractionGraph* graph) {
  check_graph(params, graph);
  Embeddings<Real> e;
  if (params.backbone == Backbone::mf || params.layers == 0) {
    e.user_pref = params.pref_user;
    e.item_pref = params.pref_item;
  } else {
    const auto pref = layer_mean(*graph, stack(params.pref_user, params.pref_item), params.layers);
    unstack(pref, e.user_pref, e.item_pref, params.n_users());
  }
  squared_norms(e.user_pref, e.user_pref_sq);
  squared_norms(e.item_pref, e.item_pref_sq);
  return e;
}

template <typename Real>
ParamGrads<Real> backpropagate(const ModelParams<Real>& params, const InteractionGraph* graph,
                               const EmbeddingGrads<Real>& grads) {
  check_graph(params, graph);
  ParamGrads<Real> out;
  Matrix<Real> g_user_pop, g_item_pop;
  if (params.backbone == Backbone::mf || params.layers == 0) {
    out.pref_user = grads.user_pref;
    out.pref_item = grads.item_pref;
    g_user_pop = grads.user_pop;
    g_item_pop = grads.item_pop;
  } else {
    const auto pref = layer_mean(*graph, stack(grads.user_pref, grads.item_pref), params.layers);
    unstack(pref, out.pref_user, out.pref_item, params.n_users());
    const auto pop = layer_mean(*graph, stack(grads.user_pop, grads.item_pop), params.layers);
    unstack(pop, g_user_pop, g_item_pop, params.n_users());
  }
  const auto& k = simd::active<Real>();
  const std::size_t d = params.dim;
  out.pop_user = Matrix<Real>(params.pop_user.rows(), d);
  out.pop_item = Matrix<Real>(params.pop_item.rows(), d);
  for (std::size_t u = 0; u < params.user_category_of.size(); ++u) {
    k.axpy(Real(1), g_user_pop.row(u).data(), out.pop_user.row(params.user_category_of[u]).data(), d);
  }
  for (std::size_t i = 0; i < params.item_category_of.size(); ++i) {
    k.axpy(Real(1), g_item_pop.row(i).data(), out.pop_item.row(params.item_category_of[i]).data(), d);
  }
  return out;
}

template <typename Real>
EmbeddingBatch<Real> gather_batch(const Embeddings<Real>& all, std::span<const Index> user_ids,
                                  std::span<const Index> item_ids) {
  return batch_from<Real>(all.user_pref, all.item_pref, all.user_pop, all.item_pop, nullptr,
                          nullptr, user_ids, item_ids);
}

template <typename Real>
EmbeddingBatch<Real> mf_forward(const ModelParams<Real>& params, std::span<const Index> user_ids,
                                std::span<const Index> item_ids) {
  return batch_from<Real>(params.pref_user, params.pref_item, params.pop_user, params.pop_item,
                          &params.user_category_of, &params.item_category_of, user_ids, item_ids);
}

template <typename Real>
EmbeddingBatch<Real> lightgcn_forward(const ModelParams<Real>& params,
                                      const InteractionGraph& graph,
                                      std::span<const Index> user_ids,
                                      std::span<const Index> item_ids) {
  return gather_batch(encode_all(params, &graph), user_ids, item_ids);
}

#define INVCF_INSTANTIATE(Real)                                                                  \
  template struct Embeddings<Real>;                                                              \
  template struct EmbeddingGrads<Real>;                                                          \
  template Embeddings<Real> encode_all(const ModelParams<Real>&, const InteractionGraph*);      \
  template Embeddings<Real> encode_preference(const ModelParams<Real>&, const InteractionGraph*); \
  template ParamGrads<Real> backpropagate(const ModelParams<Real>&, const InteractionGraph*,     \
                                          const EmbeddingGrads<Real>&);                          \
  template EmbeddingBatch<Real> gather_batch(const Embeddings<Real>&, std::span<const Index>,    \
                                             std::span<const Index>);                            \
  template EmbeddingBatch<Real> mf_forward(const ModelParams<Real>&, std::span<const Index>,     \
                                           std::span<const Index>);                              \
  template EmbeddingBatch<Real> lightgcn_forward(const ModelParams<Real>&,                       \
                                                 const InteractionGraph&,                        \
                                                 std::span<const Index>, std::span<const Index>);

INVCF_INSTANTIATE(float)
INVCF_INSTANTIATE(double)
#undef INVCF_INSTANTIATE

}  // namespace invcf::encoders
