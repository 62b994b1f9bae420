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

#include "invcf/eval/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "invcf/error.hpp"
#include "invcf/simd/kernels.hpp"
#include "invcf/threads.hpp"

namespace invcf::eval {

nlohmann::json EvalResult::to_json() const {
  return {{"K", k}, {"hr", hr}, {"recall", recall}, {"ndcg", ndcg}, {"n_users", n_users}};
}

EvalResult EvalResult::from_json(const nlohmann::json& j) {
  return {j.at("K").get<std::size_t>(), j.at("hr").get<double>(), j.at("recall").get<double>(),
          j.at("ndcg").get<double>(), j.at("n_users").get<std::size_t>()};
}

UserMetrics metrics_at_k(std::span<const Index> ranking, std::span<const Index> positives,
                         std::size_t k) {
  if (positives.empty()) fail(ErrorCode::invalid_input, "metrics_at_k needs at least one positive");
  std::vector<Index> pos(positives.begin(), positives.end());
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  const std::size_t depth = std::min(k, ranking.size());
  std::size_t hits = 0;
  double dcg = 0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (std::binary_search(pos.begin(), pos.end(), ranking[r])) {
      ++hits;
      dcg += 1.0 / std::log2(double(r) + 2.0);
    }
  }
  double idcg = 0;
  for (std::size_t r = 0; r < std::min(pos.size(), k); ++r) idcg += 1.0 / std::log2(double(r) + 2.0);
  UserMetrics m;
  m.hr = hits > 0 ? 1.0 : 0.0;
  m.recall = double(hits) / double(pos.size());
  m.ndcg = idcg > 0 ? dcg / idcg : 0.0;
  return m;
}

template <typename Real>
void score_items(const encoders::Embeddings<Real>& pref, Index user, std::vector<double>& out) {
  const std::size_t n = pref.item_pref.rows(), d = pref.item_pref.cols();
  std::vector<Real> dots(n);
  simd::active<Real>().dot_rows(pref.item_pref.values().data(), n, d,
                                pref.user_pref.row(user).data(), dots.data());
  const double nu = std::sqrt(double(pref.user_pref_sq[user]));
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ni = std::sqrt(double(pref.item_pref_sq[i]));
    out[i] = nu > 0 && ni > 0 ? double(dots[i]) / (nu * ni) : 0.0;
  }
}

std::vector<Index> rank_by_score(std::span<const double> scores, std::span<const Index> exclude,
                                 std::size_t limit) {
  std::vector<Index> cand;
  cand.reserve(scores.size());
  std::size_t e = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    while (e < exclude.size() && exclude[e] < i) ++e;
    if (e < exclude.size() && exclude[e] == i) continue;
    cand.push_back(i);
  }
  const auto before = [&](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  if (limit > 0 && limit < cand.size()) {
    std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(limit), cand.end(), before);
    cand.resize(limit);
  } else {
    std::sort(cand.begin(), cand.end(), before);
  }
  return cand;
}

template <typename Real>
std::vector<Index> rank_items(const encoders::ModelParams<Real>& params,
                              const encoders::InteractionGraph* graph, Index user,
                              std::span<const Index> exclude) {
  if (user >= params.n_users()) fail(ErrorCode::index, "user index out of range");
  const auto pref = encoders::encode_preference(params, graph);
  std::vector<double> scores;
  score_items(pref, user, scores);
  std::vector<Index> ex(exclude.begin(), exclude.end());
  std::sort(ex.begin(), ex.end());
  return rank_by_score(scores, ex, 0);
}

namespace {

std::vector<std::vector<Index>> exclusions(const dataio::InteractionDataset& train,
                                           const EvalOptions& opt, std::size_t n_users) {
  std::vector<std::vector<Index>> out(n_users);
  if (opt.exclude_train) out = train.items_by_user();
  if (opt.also_exclude) {
    const auto extra = opt.also_exclude->items_by_user();
    for (std::size_t u = 0; u < n_users; ++u) {
      std::vector<Index> merged;
      std::set_union(out[u].begin(), out[u].end(), extra[u].begin(), extra[u].end(),
                     std::back_inserter(merged));
      out[u] = std::move(merged);
    }
  }
  return out;
}

// Runs fn(user, scratch) for every user, spread over worker threads.
template <typename Fn>
void parallel_users(std::size_t n_users, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(thread_budget(threads), unsigned(n_users)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    std::vector<double> scratch;
    try {
      for (std::size_t u; (u = next.fetch_add(1)) < n_users;) fn(u, scratch);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = n_users;
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

template <typename Real>
void check_shapes(const encoders::ModelParams<Real>& params, const dataio::InteractionDataset& test,
                  const dataio::InteractionDataset& train) {
  if (!test.shares_maps_with(train) && (test.n_users() != train.n_users() || test.n_items() != train.n_items())) {
    fail(ErrorCode::invalid_input, "test and train splits use different index maps");
  }
  if (train.n_users() != params.n_users() || train.n_items() != params.n_items()) {
    fail(ErrorCode::invalid_input, "model shape does not match the dataset");
  }
}

}  // namespace

template <typename Real>
std::vector<std::vector<Index>> top_k_lists(const encoders::ModelParams<Real>& params,
                                            const encoders::InteractionGraph* graph,
                                            const dataio::InteractionDataset& test,
                                            const dataio::InteractionDataset& train,
                                            const EvalOptions& opt) {
  check_shapes(params, test, train);
  const std::size_t kmax = *std::max_element(opt.ks.begin(), opt.ks.end());
  const auto pref = encoders::encode_preference(params, graph);
  const auto positives = test.items_by_user();
  const auto excluded = exclusions(train, opt, params.n_users());
  std::vector<std::vector<Index>> lists(params.n_users());
  parallel_users(params.n_users(), opt.threads, [&](std::size_t u, std::vector<double>& scores) {
    if (positives[u].empty()) return;
    score_items(pref, Index(u), scores);
    lists[u] = rank_by_score(scores, excluded[u], kmax);
  });
  return lists;
}

template <typename Real>
std::vector<EvalResult> evaluate(const encoders::ModelParams<Real>& params,
                                 const encoders::InteractionGraph* graph,
                                 const dataio::InteractionDataset& test,
                                 const dataio::InteractionDataset& train,
                                 const EvalOptions& opt) {
  if (opt.ks.empty() || *std::min_element(opt.ks.begin(), opt.ks.end()) == 0) {
    fail(ErrorCode::config, "K values must be >= 1");
  }
  const auto lists = top_k_lists(params, graph, test, train, opt);
  const auto positives = test.items_by_user();
  std::vector<EvalResult> out;
  for (auto k : opt.ks) {
    EvalResult r;
    r.k = k;
    for (std::size_t u = 0; u < lists.size(); ++u) {
      if (positives[u].empty() || lists[u].empty()) continue;
      const auto m = metrics_at_k(lists[u], positives[u], k);
      r.hr += m.hr;
      r.recall += m.recall;
      r.ndcg += m.ndcg;
      ++r.n_users;
    }
    if (r.n_users == 0) fail(ErrorCode::empty_evaluation, "no user has both test positives and candidates");
    r.hr /= double(r.n_users);
    r.recall /= double(r.n_users);
    r.ndcg /= double(r.n_users);
    out.push_back(r);
  }
  return out;
}

#define INVCF_INSTANTIATE(Real)                                                                   \
  template void score_items(const encoders::Embeddings<Real>&, Index, std::vector<double>&);     \
  template std::vector<Index> rank_items(const encoders::ModelParams<Real>&,                      \
                                         const encoders::InteractionGraph*, Index,                \
                                         std::span<const Index>);                                 \
  template std::vector<EvalResult> evaluate(const encoders::ModelParams<Real>&,                   \
                                            const encoders::InteractionGraph*,                    \
                                            const dataio::InteractionDataset&,                    \
                                            const dataio::InteractionDataset&, const EvalOptions&); \
  template std::vector<std::vector<Index>> top_k_lists(                                           \
      const encoders::ModelParams<Real>&, const encoders::InteractionGraph*,                      \
      const dataio::InteractionDataset&, const dataio::InteractionDataset&, const EvalOptions&);

INVCF_INSTANTIATE(float)
INVCF_INSTANTIATE(double)
#undef INVCF_INSTANTIATE

}  // namespace invcf::eval
