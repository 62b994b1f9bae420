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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "invcf/dataio/dataset.hpp"

namespace invcf::dataio {

struct SplitBundle {
  InteractionDataset train;
  InteractionDataset validation;
  InteractionDataset test;
};

struct SplitRatios {
  double train = 0.6;
  double validation = 0.1;
  double test = 0.3;

  // Throws config error unless all are positive and they sum to 1 +- 1e-9.
  void validate() const;
  std::array<double, 3> values() const { return {train, validation, test}; }
};

/// Uniform shuffle, then contiguous cuts at round(cumulative ratio * n).
SplitBundle random_split(const InteractionDataset& dataset, const SplitRatios& ratios,
                         std::uint64_t seed);

enum class TemporalMode { by_timestamp, by_weekday };

/// by_timestamp: records sorted by (timestamp, user, item), earliest to train.
/// by_weekday: Saturday/Sunday (UTC) records form the test split; weekday
/// records are cut chronologically into train/validation at
/// train / (train + validation).
SplitBundle temporal_split(const InteractionDataset& dataset, const SplitRatios& ratios,
                           TemporalMode mode);

bool is_weekend_utc(std::int64_t unix_seconds) noexcept;

struct LongTailSpec {
  double gamma = 2.0;
  std::size_t n_groups = 50;
  double test_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LongTailResult {
  InteractionDataset test;
  InteractionDataset remainder;
  double n0 = 0.0;
  std::vector<std::size_t> quotas;       // per group, most popular first
  std::vector<std::size_t> group_supply; // interactions available per group
  std::vector<std::vector<Index>> groups;  // item indices per group
};

/// Quota of 1-based group i: round(n0 * gamma^(-(i-1)/(n_groups-1))).
std::vector<std::size_t> longtail_quotas(double n0, double gamma, std::size_t n_groups);

/// Samples a test set whose per-popularity-group sizes follow a power law in
/// gamma. n0 is the largest value whose quota total does not exceed
/// test_fraction * |dataset|.
LongTailResult make_longtail_testset(const InteractionDataset& dataset,
                                     const LongTailSpec& spec);

struct LongTailProtocol {
  InteractionDataset train;
  InteractionDataset validation;
  std::vector<double> gammas;
  std::vector<InteractionDataset> tests;  // parallel to gammas
};

/// Carves one long-tail test set per gamma, in order, each holding
/// test_fraction of the full dataset, then shuffles the remainder into
/// train and validation at train_share : (1 - train_share). Test k is drawn
/// with seed + k, the final cut with seed + gammas.size().
LongTailProtocol longtail_protocol(const InteractionDataset& dataset,
                                   const std::vector<double>& gammas, double test_fraction,
                                   double train_share, std::uint64_t seed);

/// "g200", "g2", "g2.5": the file stem for a gamma.
std::string gamma_name(double gamma);

}  // namespace invcf::dataio
