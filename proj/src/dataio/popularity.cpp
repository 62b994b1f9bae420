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

#include "invcf/dataio/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "invcf/error.hpp"

namespace invcf::dataio {
namespace {

std::vector<double> normalize(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  std::vector<double> out(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = double(counts[k]) / double(total);
  return out;
}

std::vector<double> smoothed(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  const double norm = 1.0 + kKlSmoothing * double(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = (p[k] + kKlSmoothing) / norm;
  return out;
}

}  // namespace

PopularityStats popularity_counts(const InteractionDataset& dataset) {
  PopularityStats stats;
  stats.item_counts.assign(dataset.n_items(), 0);
  stats.user_counts.assign(dataset.n_users(), 0);
  for (const auto& r : dataset.records()) {
    ++stats.item_counts[r.item];
    ++stats.user_counts[r.user];
  }
  stats.empty = dataset.empty();
  if (!stats.empty) {
    stats.item_distribution = normalize(stats.item_counts, dataset.size());
    stats.user_distribution = normalize(stats.user_counts, dataset.size());
  }
  return stats;
}

double popularity_kl(const PopularityStats& train, const PopularityStats& test) {
  if (train.item_counts.size() != test.item_counts.size()) {
    fail(ErrorCode::invalid_input, "popularity KL needs both splits over one item vocabulary");
  }
  if (train.empty || test.empty) {
    fail(ErrorCode::invalid_input, "popularity KL is undefined for an empty split");
  }
  const auto p = smoothed(train.item_distribution);
  const auto q = smoothed(test.item_distribution);
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) kl += p[k] * std::log(p[k] / q[k]);
  return std::max(kl, 0.0);
}

const char* to_string(PopularityGroup group) noexcept {
  switch (group) {
    case PopularityGroup::head:
      return "head";
    case PopularityGroup::mid:
      return "mid";
    case PopularityGroup::tail:
      return "tail";
  }
  return "unknown";
}

std::vector<PopularityGroup> third_partition(std::span<const std::uint64_t> counts) {
  const std::size_t n = counts.size();
  std::vector<PopularityGroup> groups(n, PopularityGroup::tail);
  if (n == 0) return groups;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&counts](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  const std::size_t head_end = (n + 2) / 3;
  const std::size_t mid_end = (2 * n + 2) / 3;
  const std::uint64_t head_min = counts[order[head_end - 1]];
  const std::uint64_t mid_min = counts[order[mid_end - 1]];
  for (std::size_t k = 0; k < n; ++k) {
    if (counts[k] >= head_min) {
      groups[k] = PopularityGroup::head;
    } else if (counts[k] >= mid_min) {
      groups[k] = PopularityGroup::mid;
    }
  }
  return groups;
}

SubgroupReport subgroup_histogram(const InteractionDataset& train,
                                  const InteractionDataset& test) {
  if (train.n_users() != test.n_users() || train.n_items() != test.n_items()) {
    fail(ErrorCode::invalid_input, "subgroup histogram needs splits over shared index maps");
  }
  std::vector<std::uint64_t> user_counts(train.n_users(), 0);
  std::vector<std::uint64_t> item_counts(train.n_items(), 0);
  for (const auto* split : {&train, &test}) {
    for (const auto& r : split->records()) {
      ++user_counts[r.user];
      ++item_counts[r.item];
    }
  }
  SubgroupReport report;
  report.user_groups = third_partition(user_counts);
  report.item_groups = third_partition(item_counts);
  const auto tally = [&report](const InteractionDataset& split) {
    SubgroupHistogram h;
    for (const auto& r : split.records()) {
      ++h.cells[static_cast<int>(report.user_groups[r.user])]
               [static_cast<int>(report.item_groups[r.item])];
    }
    h.total = split.size();
    return h;
  };
  report.train = tally(train);
  report.test = tally(test);
  return report;
}

}  // namespace invcf::dataio
