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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "invcf/error.hpp"
#include "invcf/trainer/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

namespace {

using namespace invcf;
using namespace invcf::trainer;
using dataio::Index;
namespace tt = invcf::testing;

// 10 users x 14 items with skewed item degrees; user 9 and item 13 are
// present in the maps but never interact.
dataio::SplitBundle toy_splits(std::uint64_t salt = 0) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 9; ++u) {
    for (Index i = 0; i < 13; ++i) {
      if (i <= u / 2 + 1 || (u * 3 + i + salt) % 7 == 0) pairs.emplace_back(u, i);
    }
  }
  auto train = tt::index_dataset(10, 14, pairs);
  auto empty = train.with_records({});
  return {train, empty, empty};
}

TrainConfig small_config(Method method) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.dim = 6;
  cfg.batch_size = 16;
  cfg.n_negatives = 4;
  cfg.learning_rate = 0.02;
  cfg.max_epochs = 3;
  cfg.seed = 5;
  cfg.loss.alpha = 0.1;
  cfg.loss.lambda1 = 0.05;
  cfg.loss.lambda2 = 0.05;
  return cfg;
}

TEST(SampleNegatives, TwoItemWorld) {
  std::mt19937_64 rng(1);
  const std::vector<Index> pos{0};
  for (auto i : sample_negatives(pos, 2, 50, rng)) EXPECT_EQ(i, 1u);
}

TEST(SampleNegatives, UniformOverComplement) {
  // Sparse path (rejection) and dense path (explicit complement).
  for (const std::vector<Index>& pos : {std::vector<Index>{1, 3}, std::vector<Index>{0, 1, 2, 4}}) {
    std::mt19937_64 rng(9);
    const std::size_t n_items = 8 - (pos.size() == 4 ? 2 : 0);
    const std::size_t draws = 100000;
    std::map<Index, std::size_t> counts;
    for (auto i : sample_negatives(pos, n_items, draws, rng)) ++counts[i];
    const double free = double(n_items - pos.size());
    EXPECT_EQ(counts.size(), std::size_t(free));
    const double p = 1.0 / free;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (const auto& [item, c] : counts) {
      EXPECT_FALSE(std::binary_search(pos.begin(), pos.end(), item));
      EXPECT_LT(std::abs(double(c) - draws * p), 3 * sigma) << "item " << item;
    }
  }
}

TEST(SampleNegatives, DeterministicForSeed) {
  std::mt19937_64 a(4), b(4);
  const std::vector<Index> pos{2, 5};
  EXPECT_EQ(sample_negatives(pos, 30, 64, a), sample_negatives(pos, 30, 64, b));
}

TEST(SampleNegatives, UserWithEverythingIsDegenerate) {
  std::mt19937_64 rng(1);
  const std::vector<Index> pos{0, 1, 2};
  try {
    sample_negatives(pos, 3, 1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_user);
  }
}

TEST(IpsWeights, InverseCountNormalized) {
  dataio::PopularityStats stats;
  stats.item_counts = {1, 3};
  const auto w = ips_cn_weights(stats);
  EXPECT_DOUBLE_EQ(w[0], 2.0);
  EXPECT_DOUBLE_EQ(w[1], 2.0 / 3.0);
  // Interaction-weighted mean is one.
  EXPECT_DOUBLE_EQ((1 * w[0] + 3 * w[1]) / 4, 1.0);
  stats.item_counts = {5, 5, 5, 0};
  const auto u = ips_cn_weights(stats);
  EXPECT_DOUBLE_EQ(u[0], 1.0);
  EXPECT_DOUBLE_EQ(u[2], 1.0);
  EXPECT_EQ(u[3], 0.0);
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
  const auto s = toy_splits();
  Trainer<double> t(s.train, small_config(Method::erm_softmax));
  auto params = t.init_params();
  const auto before = params;
  auto state = OptimState<double>::zeros_like(params);
  encoders::ParamGrads<double> g{Matrix<double>(params.pref_user.rows(), params.dim),
                                 Matrix<double>(params.pref_item.rows(), params.dim),
                                 Matrix<double>(params.pop_user.rows(), params.dim),
                                 Matrix<double>(params.pop_item.rows(), params.dim)};
  for (std::size_t c = 0; c < params.dim; ++c) g.pref_item(2, c) = (c % 2 ? 1.0 : -1.0) * (c + 1) * 0.3;
  adam_step(params, g, state, 1e-3);
  EXPECT_EQ(state.step, 1u);
  for (std::size_t c = 0; c < params.dim; ++c) {
    const double sign = c % 2 ? 1.0 : -1.0;
    EXPECT_NEAR(params.pref_item(2, c), before.pref_item(2, c) - 1e-3 * sign, 1e-10);
  }
  EXPECT_EQ(params.pref_user, before.pref_user);
  EXPECT_EQ(params.pop_item, before.pop_item);
  for (std::size_t r = 0; r < params.pref_item.rows(); ++r) {
    if (r == 2) continue;
    for (std::size_t c = 0; c < params.dim; ++c) {
      EXPECT_EQ(params.pref_item(r, c), before.pref_item(r, c));
      EXPECT_EQ(state.m[1](r, c), 0.0);
      EXPECT_EQ(state.v[1](r, c), 0.0);
    }
  }
}

TEST(Adam, NonFiniteGradientRaises) {
  const auto s = toy_splits();
  Trainer<double> t(s.train, small_config(Method::erm_softmax));
  auto params = t.init_params();
  auto state = OptimState<double>::zeros_like(params);
  encoders::ParamGrads<double> g{Matrix<double>(params.pref_user.rows(), params.dim),
                                 Matrix<double>(params.pref_item.rows(), params.dim),
                                 Matrix<double>(params.pop_user.rows(), params.dim),
                                 Matrix<double>(params.pop_item.rows(), params.dim)};
  g.pop_user(0, 0) = std::nan("");
  try {
    adam_step(params, g, state, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::numeric);
  }
}

TEST(TrainEpoch, BatchCountIsCeiling) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index k = 0; k < 10; ++k) pairs.emplace_back(k % 4, k);
  const auto train = tt::index_dataset(4, 12, pairs);
  auto cfg = small_config(Method::invcf);
  cfg.batch_size = 4;
  Trainer<double> t(train, cfg);
  auto params = t.init_params();
  auto state = OptimState<double>::zeros_like(params);
  std::mt19937_64 rng(1);
  const auto stats = t.train_epoch(params, state, rng);
  EXPECT_EQ(stats.n_batches, 3u);
  EXPECT_EQ(state.step, 3u);
}

TEST(TrainEpoch, FullBatchErmLossDecreases) {
  const auto s = toy_splits();
  auto cfg = small_config(Method::erm_softmax);
  cfg.batch_size = s.train.size();
  cfg.n_negatives = 0;  // in-batch: no sampling noise
  cfg.learning_rate = 0.01;
  Trainer<double> t(s.train, cfg);
  auto params = t.init_params();
  auto state = OptimState<double>::zeros_like(params);
  std::mt19937_64 rng(3);
  double last = INFINITY;
  for (int e = 0; e < 5; ++e) {
    const auto stats = t.train_epoch(params, state, rng);
    EXPECT_LT(stats.loss, last) << "epoch " << e;
    last = stats.loss;
  }
}

TEST(TrainEpoch, UntouchedEntitiesKeepTheirParameters) {
  const auto s = toy_splits();
  auto cfg = small_config(Method::invcf);
  cfg.n_negatives = 0;
  Trainer<double> t(s.train, cfg);
  auto params = t.init_params();
  const auto before = params;
  auto state = OptimState<double>::zeros_like(params);
  std::mt19937_64 rng(2);
  t.train_epoch(params, state, rng);
  // User 9 and item 13 never interact; count-0 categories hold only them.
  for (std::size_t c = 0; c < params.dim; ++c) {
    EXPECT_EQ(params.pref_user(9, c), before.pref_user(9, c));
    EXPECT_EQ(params.pref_item(13, c), before.pref_item(13, c));
    EXPECT_EQ(params.pop_user(params.user_category_of[9], c),
              before.pop_user(params.user_category_of[9], c));
    EXPECT_EQ(params.pop_item(params.item_category_of[13], c),
              before.pop_item(params.item_category_of[13], c));
  }
  EXPECT_NE(params.pref_user, before.pref_user);
}

encoders::ModelParams<double> run_epochs(const dataio::InteractionDataset& train,
                                         const TrainConfig& cfg, int epochs) {
  Trainer<double> t(train, cfg);
  auto params = t.init_params();
  auto state = OptimState<double>::zeros_like(params);
  std::mt19937_64 rng(cfg.seed);
  for (int e = 0; e < epochs; ++e) t.train_epoch(params, state, rng);
  return params;
}

TEST(Ablations, ZeroWeightsMatchTheirReductions) {
  const auto s = toy_splits();
  auto base = small_config(Method::invcf);

  auto zero = base;
  zero.loss.alpha = zero.loss.lambda1 = zero.loss.lambda2 = 0;
  EXPECT_EQ(run_epochs(s.train, zero, 2), run_epochs(s.train, small_config(Method::erm_softmax), 2));

  auto no_aug = base;
  no_aug.loss.lambda1 = 0;
  EXPECT_EQ(run_epochs(s.train, no_aug, 2), run_epochs(s.train, small_config(Method::invcf_i), 2));

  auto no_dis = base;
  no_dis.loss.lambda2 = 0;
  EXPECT_EQ(run_epochs(s.train, no_dis, 2), run_epochs(s.train, small_config(Method::invcf_d), 2));

  EXPECT_NE(run_epochs(s.train, base, 2), run_epochs(s.train, no_dis, 2));
}

TEST(Ablations, MethodSwitches) {
  auto cfg = small_config(Method::invcf_i);
  EXPECT_EQ(cfg.effective_loss().lambda1, 0.0);
  EXPECT_EQ(cfg.effective_loss().lambda2, cfg.loss.lambda2);
  cfg.method = Method::erm_bpr;
  EXPECT_EQ(cfg.risk(), losses::Risk::bpr);
  EXPECT_EQ(cfg.effective_loss().alpha, 0.0);
  EXPECT_EQ(parse_method("invcf-d"), Method::invcf_d);
  EXPECT_EQ(parse_method("IPS_CN"), Method::ips_cn);
  EXPECT_THROW(parse_method("dice"), Error);
}

TEST(Fit, PatienceStopsAndKeepsBestEpoch) {
  const auto s = toy_splits();
  auto cfg = small_config(Method::invcf);
  cfg.max_epochs = 10;
  cfg.patience = 1;
  Validator<double> worsening = [](const encoders::ModelParams<double>&, std::uint32_t epoch) {
    eval::EvalResult r;
    r.ndcg = 1.0 / epoch;
    return std::optional(r);
  };
  const auto result = fit<double>(s, cfg, worsening);
  EXPECT_EQ(result.history.epochs.size(), 2u);
  EXPECT_EQ(result.history.best_epoch, 1u);
  EXPECT_EQ(result.history.stop_reason, "patience");
  EXPECT_EQ(result.params, run_epochs(s.train, cfg, 1));
}

TEST(Fit, WithoutValidationRunsAllEpochsAndReplays) {
  const auto s = toy_splits();
  auto cfg = small_config(Method::invcf);
  const auto a = fit<double>(s, cfg);
  const auto b = fit<double>(s, cfg);
  EXPECT_EQ(a.history.epochs.size(), cfg.max_epochs);
  EXPECT_EQ(a.history.stop_reason, "max_epochs");
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.history.to_json_lines(), b.history.to_json_lines());
  EXPECT_EQ(a.params, run_epochs(s.train, cfg, 3));
}

TEST(Fit, BaselinesRunOnLightGcn) {
  const auto s = toy_splits();
  for (auto m : {Method::erm_bpr, Method::ips_cn, Method::invcf}) {
    auto cfg = small_config(m);
    cfg.backbone = encoders::Backbone::lightgcn;
    cfg.layers = 2;
    cfg.max_epochs = 2;
    const auto r = fit<float>(s, cfg);
    for (const auto& e : r.history.epochs) EXPECT_TRUE(std::isfinite(e.loss)) << to_string(m);
  }
}

TEST(Fit, EarlyStoppingOnRealValidation) {
  auto s = toy_splits();
  std::vector<dataio::Interaction> val;
  for (Index u = 0; u < 9; ++u) val.push_back({u, 12, std::nullopt, std::nullopt});
  s.validation = s.train.with_records(val);
  auto cfg = small_config(Method::invcf);
  cfg.max_epochs = 4;
  const auto r = fit<double>(s, cfg);
  ASSERT_FALSE(r.history.epochs.empty());
  for (const auto& e : r.history.epochs) {
    ASSERT_TRUE(e.validation.has_value());
    EXPECT_GE(e.validation->ndcg, 0.0);
  }
  EXPECT_GE(r.history.best_epoch, 1u);
}

struct SmokePoint {
  encoders::Backbone backbone;
  losses::Discrepancy dis;
  losses::Augmentation aug;
};

class TrainedGradient : public ::testing::TestWithParam<SmokePoint> {};

TEST_P(TrainedGradient, JointGradientMatchesFiniteDifferences) {
  const auto p = GetParam();
  const auto s = toy_splits(3);
  auto cfg = small_config(Method::invcf);
  cfg.backbone = p.backbone;
  cfg.layers = 2;
  cfg.loss.discrepancy = p.dis;
  cfg.loss.augmentation = p.aug;
  cfg.loss.alpha = 0.5;
  cfg.loss.lambda1 = 0.3;
  cfg.loss.lambda2 = 0.3;
  Trainer<double> t(s.train, cfg);
  auto params = t.init_params();
  auto state = OptimState<double>::zeros_like(params);
  std::mt19937_64 rng(cfg.seed);
  for (int e = 0; e < 3; ++e) t.train_epoch(params, state, rng);
  std::vector<std::size_t> order{0, 5, 11, 17, 23, 29};
  const auto batch = t.make_batch(order, rng);
  const auto groups = losses::EntityGroups::from_stats(dataio::popularity_counts(s.train));
  const double err = tt::gradient_relative_error(params, t.graph(), batch, cfg.effective_loss(),
                                                 &groups, tt::Term::joint, 17);
  EXPECT_LT(err, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(
    SmokePoints, TrainedGradient,
    ::testing::Values(
        SmokePoint{encoders::Backbone::mf, losses::Discrepancy::dcor,
                   losses::Augmentation::random_permutation},
        SmokePoint{encoders::Backbone::mf, losses::Discrepancy::mmd,
                   losses::Augmentation::head_group},
        SmokePoint{encoders::Backbone::lightgcn, losses::Discrepancy::dcor,
                   losses::Augmentation::tail_group},
        SmokePoint{encoders::Backbone::lightgcn, losses::Discrepancy::l2,
                   losses::Augmentation::different_group},
        SmokePoint{encoders::Backbone::mf, losses::Discrepancy::l2,
                   losses::Augmentation::random_permutation}));

TEST(History, JsonLines) {
  TrainHistory h;
  EpochStats e;
  e.epoch = 1;
  e.loss = 2.5;
  h.epochs.push_back(e);
  h.best_epoch = 1;
  h.stop_reason = "max_epochs";
  const auto text = h.to_json_lines();
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first["epoch"], 1);
  EXPECT_EQ(first["loss"], 2.5);
  EXPECT_FALSE(first.contains("validation"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

}  // namespace
