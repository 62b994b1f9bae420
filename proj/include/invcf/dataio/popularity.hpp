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
#include <cstdint>
#include <span>
#include <vector>

#include "invcf/dataio/dataset.hpp"

namespace invcf::dataio {

struct PopularityStats {
  std::vector<std::uint64_t> item_counts;
  std::vector<std::uint64_t> user_counts;
  std::vector<double> item_distribution;  // empty when no interactions
  std::vector<double> user_distribution;
  bool empty = true;
};

PopularityStats popularity_counts(const InteractionDataset& dataset);

inline constexpr double kKlSmoothing = 1e-12;

/// D_KL(P_train || P_test) in nats over item popularity. Both distributions
/// get additive smoothing before renormalization.
double popularity_kl(const PopularityStats& train, const PopularityStats& test);

enum class PopularityGroup : std::uint8_t { head = 0, mid = 1, tail = 2 };

const char* to_string(PopularityGroup group) noexcept;

/// Head/mid/tail thirds by descending count. Entities tied with the last
/// member of a group join that group, so a tie never straddles two groups.
std::vector<PopularityGroup> third_partition(std::span<const std::uint64_t> counts);

struct SubgroupHistogram {
  // cells[user group][item group]
  std::array<std::array<std::uint64_t, 3>, 3> cells{};
  std::uint64_t total = 0;
};

struct SubgroupReport {
  SubgroupHistogram train;
  SubgroupHistogram test;
  std::vector<PopularityGroup> user_groups;
  std::vector<PopularityGroup> item_groups;
};

/// Groups come from the combined train+test counts so both splits share one
/// partition.
SubgroupReport subgroup_histogram(const InteractionDataset& train,
                                  const InteractionDataset& test);

}  // namespace invcf::dataio
