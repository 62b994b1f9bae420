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

#include "invcf/dataio/split.hpp"

#include <algorithm>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "invcf/error.hpp"

namespace invcf::dataio {
namespace {

std::vector<Interaction> gather(const std::vector<Interaction>& records,
                                std::vector<std::size_t> positions) {
  std::sort(positions.begin(), positions.end());
  std::vector<Interaction> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(records[p]);
  return out;
}

// Cut points at round(cumulative ratio * n); each split lands within one
// record of its exact share.
std::array<std::size_t, 2> cut_points(std::size_t n, double first, double second) {
  const auto clamp = [n](double x) {
    return static_cast<std::size_t>(std::clamp<double>(std::round(x), 0.0, double(n)));
  };
  const std::size_t a = clamp(first * double(n));
  const std::size_t b = std::max(a, clamp((first + second) * double(n)));
  return {a, b};
}

SplitBundle bundle_from_order(const InteractionDataset& dataset,
                              const std::vector<std::size_t>& order, std::size_t a,
                              std::size_t b) {
  const auto& records = dataset.records();
  std::vector<std::size_t> train(order.begin(), order.begin() + a);
  std::vector<std::size_t> val(order.begin() + a, order.begin() + b);
  std::vector<std::size_t> test(order.begin() + b, order.end());
  return SplitBundle{dataset.with_records(gather(records, std::move(train))),
                     dataset.with_records(gather(records, std::move(val))),
                     dataset.with_records(gather(records, std::move(test)))};
}

}  // namespace

void SplitRatios::validate() const {
  for (double r : values()) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::config, "split ratios must be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    fail(ErrorCode::config, "split ratios must sum to 1");
  }
}

SplitBundle random_split(const InteractionDataset& dataset, const SplitRatios& ratios,
                         std::uint64_t seed) {
  ratios.validate();
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto [a, b] = cut_points(order.size(), ratios.train, ratios.validation);
  return bundle_from_order(dataset, order, a, b);
}

bool is_weekend_utc(std::int64_t unix_seconds) noexcept {
  using namespace std::chrono;
  const sys_seconds t{seconds{unix_seconds}};
  const weekday wd{floor<days>(t)};
  return wd == Saturday || wd == Sunday;
}

SplitBundle temporal_split(const InteractionDataset& dataset, const SplitRatios& ratios,
                           TemporalMode mode) {
  ratios.validate();
  if (!dataset.has_timestamps() || dataset.empty()) {
    fail(ErrorCode::invalid_input, "temporal split requires timestamps on every record");
  }
  const auto& records = dataset.records();
  const auto chronological = [&records](std::size_t x, std::size_t y) {
    const auto& a = records[x];
    const auto& b = records[y];
    return std::tie(*a.timestamp, a.user, a.item) < std::tie(*b.timestamp, b.user, b.item);
  };

  std::vector<std::size_t> order;
  SplitBundle out;
  if (mode == TemporalMode::by_timestamp) {
    order.resize(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), chronological);
    const auto [a, b] = cut_points(order.size(), ratios.train, ratios.validation);
    out = bundle_from_order(dataset, order, a, b);
  } else {
    std::vector<std::size_t> weekend;
    for (std::size_t n = 0; n < records.size(); ++n) {
      (is_weekend_utc(*records[n].timestamp) ? weekend : order).push_back(n);
    }
    std::stable_sort(order.begin(), order.end(), chronological);
    const double share = ratios.train / (ratios.train + ratios.validation);
    const auto [a, b] = cut_points(order.size(), share, 1.0 - share);
    std::vector<std::size_t> train(order.begin(), order.begin() + a);
    std::vector<std::size_t> val(order.begin() + a, order.end());
    (void)b;
    out = SplitBundle{dataset.with_records(gather(records, std::move(train))),
                      dataset.with_records(gather(records, std::move(val))),
                      dataset.with_records(gather(records, std::move(weekend)))};
  }
  if (out.train.empty()) fail(ErrorCode::degenerate_split, "temporal split left train empty");
  return out;
}

void LongTailSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::config, "gamma must be > 0");
  if (n_groups < 2) fail(ErrorCode::config, "long-tail generator needs at least 2 groups");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorCode::config, "test fraction must lie in (0, 1)");
  }
}

std::vector<std::size_t> longtail_quotas(double n0, double gamma, std::size_t n_groups) {
  std::vector<std::size_t> quotas(n_groups);
  const double span = double(n_groups - 1);
  for (std::size_t g = 0; g < n_groups; ++g) {
    quotas[g] = static_cast<std::size_t>(std::llround(n0 * std::pow(gamma, -double(g) / span)));
  }
  return quotas;
}

LongTailResult make_longtail_testset(const InteractionDataset& dataset,
                                     const LongTailSpec& spec) {
  spec.validate();
  if (dataset.empty()) fail(ErrorCode::invalid_input, "long-tail generator needs interactions");

  const auto& records = dataset.records();
  std::vector<std::uint64_t> counts(dataset.n_items(), 0);
  for (const auto& r : records) ++counts[r.item];
  std::vector<Index> ranked;
  for (Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) ranked.push_back(i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&counts](Index a, Index b) { return counts[a] > counts[b]; });
  const std::size_t m = ranked.size();
  const std::size_t n_groups = spec.n_groups;
  if (m < n_groups) {
    fail(ErrorCode::infeasible_spec, "only " + std::to_string(m) + " items for " +
                                         std::to_string(n_groups) + " popularity groups");
  }

  LongTailResult result;
  result.groups.resize(n_groups);
  std::vector<std::size_t> group_of(dataset.n_items(), n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    for (std::size_t k = g * m / n_groups; k < (g + 1) * m / n_groups; ++k) {
      result.groups[g].push_back(ranked[k]);
      group_of[ranked[k]] = g;
    }
  }
  std::vector<std::vector<std::size_t>> members(n_groups);
  for (std::size_t n = 0; n < records.size(); ++n) members[group_of[records[n].item]].push_back(n);
  result.group_supply.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) result.group_supply[g] = members[g].size();

  const double target = spec.test_fraction * double(records.size());
  const auto total = [&](double n0) {
    const auto q = longtail_quotas(n0, spec.gamma, n_groups);
    return double(std::accumulate(q.begin(), q.end(), std::size_t{0}));
  };
  double lo = 0.0;
  double hi = target + 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) <= target ? lo : hi) = mid;
  }
  result.n0 = lo;
  result.quotas = longtail_quotas(lo, spec.gamma, n_groups);

  for (std::size_t g = 0; g < n_groups; ++g) {
    if (result.quotas[g] > result.group_supply[g]) {
      fail(ErrorCode::infeasible_spec,
           "popularity group " + std::to_string(g + 1) + " needs " +
               std::to_string(result.quotas[g]) + " interactions but has " +
               std::to_string(result.group_supply[g]));
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<char> chosen(records.size(), 0);
  std::vector<std::size_t> picked;
  for (std::size_t g = 0; g < n_groups; ++g) {
    picked.clear();
    std::sample(members[g].begin(), members[g].end(), std::back_inserter(picked),
                result.quotas[g], rng);
    for (auto n : picked) chosen[n] = 1;
  }
  std::vector<Interaction> test, rest;
  for (std::size_t n = 0; n < records.size(); ++n) {
    (chosen[n] ? test : rest).push_back(records[n]);
  }
  result.test = dataset.with_records(std::move(test));
  result.remainder = dataset.with_records(std::move(rest));
  return result;
}

LongTailProtocol longtail_protocol(const InteractionDataset& dataset,
                                   const std::vector<double>& gammas, double test_fraction,
                                   double train_share, std::uint64_t seed) {
  if (gammas.empty()) fail(ErrorCode::config, "longtail protocol needs at least one gamma");
  if (!(train_share > 0 && train_share < 1)) fail(ErrorCode::config, "train_share must be in (0, 1)");
  if (!(test_fraction > 0) || test_fraction * double(gammas.size()) >= 1) {
    fail(ErrorCode::config, "test sets would consume the whole dataset");
  }
  LongTailProtocol out;
  out.gammas = gammas;
  InteractionDataset rest = dataset;
  const double total = double(dataset.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    LongTailSpec spec;
    spec.gamma = gammas[k];
    spec.test_fraction = test_fraction * total / double(rest.size());
    spec.seed = seed + k;
    auto r = make_longtail_testset(rest, spec);
    out.tests.push_back(std::move(r.test));
    rest = std::move(r.remainder);
  }
  std::vector<std::size_t> order(rest.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed + gammas.size());
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_share * double(order.size())));
  std::vector<Interaction> train, validation;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < cut ? train : validation).push_back(rest.records()[order[k]]);
  }
  out.train = rest.with_records(std::move(train));
  out.validation = rest.with_records(std::move(validation));
  return out;
}

std::string gamma_name(double gamma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%g", gamma);
  return buf;
}

}  // namespace invcf::dataio
