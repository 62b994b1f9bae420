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
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "invcf/dataio/split.hpp"
#include "invcf/encoders/encoder.hpp"
#include "invcf/eval/metrics.hpp"
#include "invcf/losses/objective.hpp"

namespace invcf::trainer {

using dataio::Index;

enum class Method { invcf, invcf_i, invcf_d, erm_softmax, erm_bpr, ips_cn };

const char* to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct TrainConfig {
  losses::LossConfig loss;
  Method method = Method::invcf;
  encoders::Backbone backbone = encoders::Backbone::mf;
  std::uint32_t layers = 2;  // LightGCN only
  std::size_t dim = 64;
  double learning_rate = 5e-4;
  std::size_t batch_size = 1024;
  // 0 means in-batch negatives (the other positives of the batch).
  std::size_t n_negatives = 128;
  std::uint32_t max_epochs = 500;
  std::uint32_t patience = 20;
  std::size_t eval_k = 20;
  std::uint64_t seed = 0;
  std::uint64_t pop_bucket_width = 1;

  void validate() const;
  /// Loss weights after the method's switches: INVCF_I zeroes lambda1,
  /// INVCF_D zeroes lambda2, the ERM and IPS baselines zero all three.
  losses::LossConfig effective_loss() const;
  losses::Risk risk() const;
};

/// n draws, uniform with replacement over items the user never interacted
/// with. `positives` must be sorted. Throws degenerate_user if there are none.
std::vector<Index> sample_negatives(std::span<const Index> positives, std::size_t n_items,
                                    std::size_t n, std::mt19937_64& rng);

/// w_i = 1 / count_i, rescaled so the interaction-weighted mean is 1.
/// Zero-count items get weight 0 (they never appear as train positives).
std::vector<double> ips_cn_weights(const dataio::PopularityStats& train_stats);

template <typename Real>
struct OptimState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  // m and v for pref_user, pref_item, pop_user, pop_item, in that order.
  std::array<Matrix<Real>, 4> m;
  std::array<Matrix<Real>, 4> v;

  static OptimState zeros_like(const encoders::ModelParams<Real>& params);
};

/// Bias-corrected Adam on rows with a nonzero gradient; other rows and
/// their moments are left untouched. Throws numeric on non-finite input.
template <typename Real>
void adam_step(encoders::ModelParams<Real>& params, const encoders::ParamGrads<Real>& grads,
               OptimState<Real>& state, double learning_rate);

struct EpochStats {
  std::uint32_t epoch = 0;
  std::size_t n_batches = 0;
  double loss = 0;
  double rep = 0;
  double aug = 0;
  double dis = 0;
  std::optional<eval::EvalResult> validation;

  nlohmann::json to_json() const;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::uint32_t best_epoch = 0;
  std::string stop_reason;

  /// One JSON record per epoch, then a summary record.
  std::string to_json_lines() const;
};

/// Everything one training run needs beyond the parameters.
template <typename Real>
class Trainer {
 public:
  Trainer(const dataio::InteractionDataset& train, TrainConfig cfg);

  const TrainConfig& config() const noexcept { return cfg_; }
  const encoders::InteractionGraph* graph() const noexcept;
  const encoders::PopularityCategories& categories() const noexcept { return categories_; }

  encoders::ModelParams<Real> init_params() const;

  /// One shuffled pass in batches of cfg.batch_size; one Adam step each.
  EpochStats train_epoch(encoders::ModelParams<Real>& params, OptimState<Real>& state,
                         std::mt19937_64& rng) const;

  /// Step batch for the given train record indices.
  losses::StepBatch make_batch(std::span<const std::size_t> order, std::mt19937_64& rng) const;

 private:
  const dataio::InteractionDataset& train_;
  TrainConfig cfg_;
  losses::LossConfig loss_;
  std::vector<std::vector<Index>> positives_;
  encoders::InteractionGraph graph_;
  encoders::PopularityCategories categories_;
  losses::EntityGroups groups_;
  std::vector<double> ips_weights_;
};

/// Validation score per epoch; higher is better.
template <typename Real>
using Validator = std::function<std::optional<eval::EvalResult>(
    const encoders::ModelParams<Real>&, std::uint32_t epoch)>;

template <typename Real>
struct FitResult {
  encoders::ModelParams<Real> params;
  TrainHistory history;
};

/// Trains until max_epochs or `patience` epochs without a better
/// validation NDCG@K, returning the best epoch's parameters. With no
/// validator (or empty validation) the final parameters are returned.
template <typename Real>
FitResult<Real> fit(const dataio::SplitBundle& splits, const TrainConfig& cfg,
                    Validator<Real> validator = {});

/// The default validator: NDCG@K on the validation split, train excluded.
template <typename Real>
Validator<Real> split_validator(const dataio::SplitBundle& splits, const TrainConfig& cfg,
                                const encoders::InteractionGraph* graph);

}  // namespace invcf::trainer
