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

#include "invcf/trainer/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "invcf/error.hpp"
#include "invcf/simd/kernels.hpp"

namespace invcf::trainer {

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::invcf: return "INVCF";
    case Method::invcf_i: return "INVCF_I";
    case Method::invcf_d: return "INVCF_D";
    case Method::erm_softmax: return "ERM_SOFTMAX";
    case Method::erm_bpr: return "ERM_BPR";
    case Method::ips_cn: return "IPS_CN";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string n(name);
  for (auto& c : n) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto m : {Method::invcf, Method::invcf_i, Method::invcf_d, Method::erm_softmax,
                 Method::erm_bpr, Method::ips_cn}) {
    if (n == to_string(m)) return m;
  }
  fail(ErrorCode::config, "unknown method '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  loss.validate();
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) fail(ErrorCode::config, "learning_rate must be > 0");
  if (batch_size == 0) fail(ErrorCode::config, "batch_size must be >= 1");
  if (patience == 0) fail(ErrorCode::config, "patience must be >= 1");
  if (dim == 0) fail(ErrorCode::config, "dim must be >= 1");
  if (eval_k == 0) fail(ErrorCode::config, "eval_k must be >= 1");
  if (pop_bucket_width == 0) fail(ErrorCode::config, "pop_bucket_width must be >= 1");
}

losses::LossConfig TrainConfig::effective_loss() const {
  auto l = loss;
  switch (method) {
    case Method::invcf: break;
    case Method::invcf_i: l.lambda1 = 0; break;
    case Method::invcf_d: l.lambda2 = 0; break;
    case Method::erm_softmax:
    case Method::erm_bpr:
    case Method::ips_cn: l.alpha = l.lambda1 = l.lambda2 = 0; break;
  }
  return l;
}

losses::Risk TrainConfig::risk() const {
  return method == Method::erm_bpr ? losses::Risk::bpr : losses::Risk::softmax;
}

std::vector<Index> sample_negatives(std::span<const Index> positives, std::size_t n_items,
                                    std::size_t n, std::mt19937_64& rng) {
  if (positives.size() >= n_items) {
    fail(ErrorCode::degenerate_user, "user interacted with every item; no negatives to sample");
  }
  std::vector<Index> out;
  out.reserve(n);
  if (positives.size() * 2 > n_items) {
    // Dense user: draw from the explicit complement.
    std::vector<Index> pool;
    std::size_t p = 0;
    for (Index i = 0; i < n_items; ++i) {
      while (p < positives.size() && positives[p] < i) ++p;
      if (p < positives.size() && positives[p] == i) continue;
      pool.push_back(i);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t k = 0; k < n; ++k) out.push_back(pool[pick(rng)]);
    return out;
  }
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(n_items - 1));
  while (out.size() < n) {
    const Index i = pick(rng);
    if (!std::binary_search(positives.begin(), positives.end(), i)) out.push_back(i);
  }
  return out;
}

std::vector<double> ips_cn_weights(const dataio::PopularityStats& stats) {
  const auto& counts = stats.item_counts;
  std::vector<double> w(counts.size(), 0.0);
  // Interaction-weighted mean of 1/count is (#items with count > 0) / total.
  double total = 0, nonzero = 0;
  for (auto c : counts) {
    total += double(c);
    nonzero += c > 0 ? 1.0 : 0.0;
  }
  if (total == 0) return w;
  const double mean = nonzero / total;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) w[i] = (1.0 / double(counts[i])) / mean;
  }
  return w;
}

template <typename Real>
OptimState<Real> OptimState<Real>::zeros_like(const encoders::ModelParams<Real>& p) {
  OptimState s;
  const std::array<const Matrix<Real>*, 4> tables{&p.pref_user, &p.pref_item, &p.pop_user, &p.pop_item};
  for (std::size_t t = 0; t < 4; ++t) {
    s.m[t] = Matrix<Real>(tables[t]->rows(), tables[t]->cols());
    s.v[t] = Matrix<Real>(tables[t]->rows(), tables[t]->cols());
  }
  return s;
}

template <typename Real>
void adam_step(encoders::ModelParams<Real>& params, const encoders::ParamGrads<Real>& grads,
               OptimState<Real>& state, double learning_rate) {
  const std::array<Matrix<Real>*, 4> tables{&params.pref_user, &params.pref_item,
                                            &params.pop_user, &params.pop_item};
  const std::array<const Matrix<Real>*, 4> g{&grads.pref_user, &grads.pref_item, &grads.pop_user,
                                             &grads.pop_item};
  for (std::size_t t = 0; t < 4; ++t) {
    if (g[t]->rows() != tables[t]->rows() || g[t]->cols() != tables[t]->cols() ||
        state.m[t].rows() != tables[t]->rows()) {
      fail(ErrorCode::invalid_input, "adam_step: gradient or state shape mismatch");
    }
    for (Real x : g[t]->values()) {
      if (!std::isfinite(x)) fail(ErrorCode::numeric, "non-finite gradient");
    }
  }
  ++state.step;
  const double t = double(state.step);
  const Real step_size = static_cast<Real>(learning_rate / (1.0 - std::pow(state.beta1, t)));
  const Real inv_bc2 = static_cast<Real>(1.0 / std::sqrt(1.0 - std::pow(state.beta2, t)));
  const auto& k = simd::active<Real>();
  for (std::size_t ti = 0; ti < 4; ++ti) {
    const std::size_t d = tables[ti]->cols();
    for (std::size_t r = 0; r < tables[ti]->rows(); ++r) {
      const auto gr = g[ti]->row(r);
      if (std::all_of(gr.begin(), gr.end(), [](Real x) { return x == Real(0); })) continue;
      k.adam(tables[ti]->row(r).data(), gr.data(), state.m[ti].row(r).data(),
             state.v[ti].row(r).data(), d, static_cast<Real>(state.beta1),
             static_cast<Real>(state.beta2), step_size, inv_bc2, static_cast<Real>(state.eps));
    }
  }
}

nlohmann::json EpochStats::to_json() const {
  nlohmann::json j{{"epoch", epoch}, {"n_batches", n_batches}, {"loss", loss},
                   {"rep", rep},     {"aug", aug},             {"dis", dis}};
  if (validation) j["validation"] = validation->to_json();
  return j;
}

std::string TrainHistory::to_json_lines() const {
  std::string out;
  for (const auto& e : epochs) out += e.to_json().dump() + "\n";
  out += nlohmann::json{{"best_epoch", best_epoch}, {"stop_reason", stop_reason},
                        {"epochs", epochs.size()}}
             .dump() +
         "\n";
  return out;
}

template <typename Real>
Trainer<Real>::Trainer(const dataio::InteractionDataset& train, TrainConfig cfg)
    : train_(train), cfg_(std::move(cfg)), loss_(cfg_.effective_loss()) {
  cfg_.validate();
  if (train.size() == 0) fail(ErrorCode::config, "empty training split");
  positives_ = train.items_by_user();
  if (cfg_.backbone == encoders::Backbone::lightgcn && cfg_.layers > 0) {
    graph_ = encoders::InteractionGraph::build(train);
  }
  const auto stats = dataio::popularity_counts(train);
  categories_ = encoders::pop_categorize(stats, cfg_.pop_bucket_width);
  groups_ = losses::EntityGroups::from_stats(stats);
  if (cfg_.method == Method::ips_cn) ips_weights_ = ips_cn_weights(stats);
}

template <typename Real>
const encoders::InteractionGraph* Trainer<Real>::graph() const noexcept {
  return graph_.n_nodes() > 0 ? &graph_ : nullptr;
}

template <typename Real>
encoders::ModelParams<Real> Trainer<Real>::init_params() const {
  return encoders::init_params<Real>(cfg_.backbone, cfg_.layers, cfg_.dim, train_.n_users(),
                                     train_.n_items(), categories_, cfg_.seed);
}

template <typename Real>
losses::StepBatch Trainer<Real>::make_batch(std::span<const std::size_t> order,
                                            std::mt19937_64& rng) const {
  losses::StepBatch b;
  const auto& recs = train_.records();
  for (auto r : order) {
    b.users.push_back(recs[r].user);
    b.items.push_back(recs[r].item);
  }
  const std::size_t n = order.size();
  if (cfg_.n_negatives > 0 || n == 1) {
    b.n_negatives = cfg_.n_negatives > 0 ? cfg_.n_negatives : 1;
    for (std::size_t k = 0; k < n; ++k) {
      const auto negs = sample_negatives(positives_[b.users[k]], train_.n_items(), b.n_negatives, rng);
      b.negatives.insert(b.negatives.end(), negs.begin(), negs.end());
    }
  } else {
    b.n_negatives = n - 1;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) b.negatives.push_back(b.items[j]);
      }
    }
  }
  if (!ips_weights_.empty()) {
    for (auto i : b.items) b.weights.push_back(ips_weights_[i]);
  }
  return b;
}

template <typename Real>
EpochStats Trainer<Real>::train_epoch(encoders::ModelParams<Real>& params, OptimState<Real>& state,
                                      std::mt19937_64& rng) const {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::shuffle(order.begin(), order.end(), rng);
  EpochStats stats;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
    const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
    const auto batch = make_batch(std::span(order).subspan(begin, end - begin), rng);
    const auto all = encoders::encode_all(params, graph());
    auto grads = encoders::EmbeddingGrads<Real>::zeros_like(all);
    const auto parts = losses::joint_loss(all, batch, loss_, cfg_.risk(), &groups_, rng, &grads);
    adam_step(params, encoders::backpropagate(params, graph(), grads), state, cfg_.learning_rate);
    stats.loss += parts.total;
    stats.rep += parts.rep;
    stats.aug += parts.aug;
    stats.dis += parts.dis;
    ++stats.n_batches;
  }
  const double nb = double(std::max<std::size_t>(stats.n_batches, 1));
  stats.loss /= nb;
  stats.rep /= nb;
  stats.aug /= nb;
  stats.dis /= nb;
  return stats;
}

template <typename Real>
Validator<Real> split_validator(const dataio::SplitBundle& splits, const TrainConfig& cfg,
                                const encoders::InteractionGraph* graph) {
  return [&splits, k = cfg.eval_k, graph](const encoders::ModelParams<Real>& p,
                                         std::uint32_t) -> std::optional<eval::EvalResult> {
    if (splits.validation.size() == 0) return std::nullopt;
    eval::EvalOptions opt;
    opt.ks = {k};
    try {
      return eval::evaluate(p, graph, splits.validation, splits.train, opt).front();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::empty_evaluation) return std::nullopt;
      throw;
    }
  };
}

template <typename Real>
FitResult<Real> fit(const dataio::SplitBundle& splits, const TrainConfig& cfg,
                    Validator<Real> validator) {
  Trainer<Real> trainer(splits.train, cfg);
  if (!validator) validator = split_validator<Real>(splits, cfg, trainer.graph());
  FitResult<Real> result{trainer.init_params(), {}};
  auto params = result.params;
  auto state = OptimState<Real>::zeros_like(params);
  std::mt19937_64 rng(cfg.seed);
  double best = -1;
  std::uint32_t since_best = 0;
  result.history.stop_reason = "max_epochs";
  for (std::uint32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto stats = trainer.train_epoch(params, state, rng);
    stats.epoch = epoch;
    stats.validation = validator(params, epoch);
    spdlog::debug("epoch {} loss {:.6f} val ndcg {}", epoch, stats.loss,
                  stats.validation ? stats.validation->ndcg : -1.0);
    const bool scored = stats.validation.has_value();
    result.history.epochs.push_back(stats);
    if (!scored) {
      result.params = params;
      result.history.best_epoch = epoch;
      continue;
    }
    if (stats.validation->ndcg > best) {
      best = stats.validation->ndcg;
      result.params = params;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.history.stop_reason = "patience";
      break;
    }
  }
  return result;
}

template struct OptimState<float>;
template struct OptimState<double>;
template class Trainer<float>;
template class Trainer<double>;
template void adam_step(encoders::ModelParams<float>&, const encoders::ParamGrads<float>&,
                        OptimState<float>&, double);
template void adam_step(encoders::ModelParams<double>&, const encoders::ParamGrads<double>&,
                        OptimState<double>&, double);
template FitResult<float> fit(const dataio::SplitBundle&, const TrainConfig&, Validator<float>);
template FitResult<double> fit(const dataio::SplitBundle&, const TrainConfig&, Validator<double>);
template Validator<float> split_validator(const dataio::SplitBundle&, const TrainConfig&,
                                          const encoders::InteractionGraph*);
template Validator<double> split_validator(const dataio::SplitBundle&, const TrainConfig&,
                                           const encoders::InteractionGraph*);

}  // namespace invcf::trainer
