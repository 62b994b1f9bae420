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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "invcf/dataio/dataset.hpp"
#include "invcf/dataio/popularity.hpp"
#include "invcf/dataio/split.hpp"
#include "invcf/dataio/transforms.hpp"
#include "invcf/error.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace invcf::dataio;
using invcf::Error;
using invcf::ErrorCode;
using invcf::testing::index_dataset;
using invcf::testing::pairs_dataset;

std::multiset<std::pair<std::string, std::string>> id_pairs(const InteractionDataset& ds) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& r : ds.records()) out.emplace(ds.users().id(r.user), ds.items().id(r.item));
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an invcf::Error";
  return ErrorCode::format;
}

InteractionDataset random_graph(std::size_t users, std::size_t items, double density,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < users; ++u) {
    for (Index i = 0; i < items; ++i) {
      if (keep(rng)) pairs.emplace_back(u, i);
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  return index_dataset(users, items, pairs);
}

// ---- loading ---------------------------------------------------------------

TEST(LoadInteractions, TalliesUsersItemsAndRecords) {
  const auto ds = parse_interactions("u1 i1\nu1 i2\nu2 i1\n");
  EXPECT_EQ(ds.n_users(), 2u);
  EXPECT_EQ(ds.n_items(), 2u);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.records()[2].user, 1u);
  EXPECT_EQ(ds.records()[2].item, 0u);
}

TEST(LoadInteractions, EmptyInputGivesEmptyDataset) {
  const auto ds = parse_interactions("");
  EXPECT_EQ(ds.n_users(), 0u);
  EXPECT_EQ(ds.n_items(), 0u);
  EXPECT_EQ(ds.size(), 0u);
}

TEST(LoadInteractions, RatingAndTimestampColumns) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uirt");
  const auto ds = parse_interactions("u1\ti1\t5\t1000\n", opts);
  ASSERT_EQ(ds.size(), 1u);
  const auto& r = ds.records()[0];
  EXPECT_EQ(r.user, 0u);
  EXPECT_EQ(r.item, 0u);
  EXPECT_EQ(r.rating, 5.0);
  EXPECT_EQ(r.timestamp, 1000);
}

TEST(LoadInteractions, CommaDelimiterAutoDetected) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uir");
  const auto ds = parse_interactions("a,b,4.5\na,c,2\n", opts);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.items().id(1), "c");
  EXPECT_EQ(ds.records()[0].rating, 4.5);
}

TEST(LoadInteractions, MalformedLineReportsLineNumber) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uir");
  try {
    parse_interactions("u1\ti1\t5\nu2\ti2\n", opts);
    FAIL() << "expected parse error";
  } catch (const invcf::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::parse);
  }
  try {
    parse_interactions("u1\ti1\tfive\n", opts);
    FAIL() << "expected parse error";
  } catch (const invcf::ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(LoadInteractions, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_interactions("/nonexistent/ratings.tsv"); }), ErrorCode::io);
}

TEST(LoadInteractions, RoundTripThroughFileWithFixedMaps) {
  const auto dir = std::filesystem::temp_directory_path() / "invcf_dataio_rt";
  std::filesystem::create_directories(dir);
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uirt");
  const auto ds = parse_interactions("x\ty\t4\t10\nz\ty\t3.5\t20\n", opts);
  const auto layout = write_interactions(dir / "d.tsv", ds);
  write_index_map(dir / "users.txt", ds.users());
  write_index_map(dir / "items.txt", ds.items());
  LoadOptions fixed;
  fixed.layout = layout;
  fixed.fixed_users = read_index_map(dir / "users.txt");
  fixed.fixed_items = read_index_map(dir / "items.txt");
  const auto back = load_interactions(dir / "d.tsv", fixed);
  EXPECT_EQ(back.records(), ds.records());
  EXPECT_EQ(code_of([&] { parse_interactions("q\ty\t1\t1\n", fixed); }), ErrorCode::parse);
}

// ---- binarize / k-core -------------------------------------------------------

TEST(Binarize, KeepsFourOrHigher) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uir");
  const auto ds = parse_interactions("a\t1\t5\na\t2\t4\na\t3\t3\na\t4\t1\n", opts);
  const auto bin = binarize(ds);
  EXPECT_EQ(bin.size(), 2u);
  for (const auto& r : bin.records()) EXPECT_FALSE(r.rating.has_value());
}

TEST(Binarize, AllHighUnchangedAllLowEmpty) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uir");
  EXPECT_EQ(binarize(parse_interactions("a\t1\t5\nb\t2\t5\nb\t1\t5\n", opts)).size(), 3u);
  EXPECT_TRUE(binarize(parse_interactions("a\t1\t1\nb\t2\t1\n", opts)).empty());
}

TEST(Binarize, CollapsesDuplicatesAndRejectsMissingRatings) {
  LoadOptions opts;
  opts.layout = ColumnLayout::parse("uir");
  const auto bin = binarize(parse_interactions("a\t1\t5\na\t1\t4\n", opts));
  EXPECT_EQ(bin.size(), 1u);
  EXPECT_FALSE(bin.has_duplicate_pairs());
  EXPECT_EQ(code_of([] { binarize(parse_interactions("a\t1\n")); }), ErrorCode::invalid_input);
}

// Independent oracle: delete one offending entity at a time until none is left.
std::multiset<std::pair<std::string, std::string>> brute_force_core(const InteractionDataset& ds,
                                                                    std::size_t k) {
  auto edges = id_pairs(ds);
  while (true) {
    std::map<std::string, std::size_t> ud, id;
    for (const auto& [u, i] : edges) {
      ++ud[u];
      ++id[i];
    }
    std::optional<std::string> bad_user, bad_item;
    for (const auto& [u, d] : ud) {
      if (d < k) {
        bad_user = u;
        break;
      }
    }
    if (!bad_user) {
      for (const auto& [i, d] : id) {
        if (d < k) {
          bad_item = i;
          break;
        }
      }
    }
    if (!bad_user && !bad_item) return edges;
    for (auto it = edges.begin(); it != edges.end();) {
      if ((bad_user && it->first == *bad_user) || (bad_item && it->second == *bad_item)) {
        it = edges.erase(it);
      } else {
        ++it;
      }
    }
  }
}

TEST(KCore, KOneLeavesDatasetUnchanged) {
  const auto ds = pairs_dataset({{"a", "1"}, {"a", "2"}, {"b", "2"}});
  const auto out = k_core_filter(ds, 1);
  EXPECT_EQ(id_pairs(out), id_pairs(ds));
  EXPECT_EQ(out.n_users(), 2u);
  EXPECT_EQ(out.n_items(), 2u);
}

TEST(KCore, StarGraphCascadesToEmpty) {
  const auto ds = pairs_dataset({{"u", "a"}, {"u", "b"}, {"u", "c"}});
  EXPECT_TRUE(brute_force_core(ds, 2).empty());
  const auto out = k_core_filter(ds, 2);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.n_users(), 0u);
  EXPECT_EQ(out.n_items(), 0u);
}

TEST(KCore, CompleteBipartiteThreeByThreeSurvivesKThree) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 3; ++u)
    for (Index i = 0; i < 3; ++i) pairs.emplace_back(u, i);
  const auto ds = index_dataset(3, 3, pairs);
  EXPECT_EQ(id_pairs(k_core_filter(ds, 3)), id_pairs(ds));
  EXPECT_TRUE(k_core_filter(ds, 4).empty());
}

TEST(KCore, MatchesBruteForceAndIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto ds = random_graph(14, 12, 0.3, seed);
    for (std::uint32_t k : {2u, 3u, 4u}) {
      const auto once = k_core_filter(ds, k);
      EXPECT_EQ(id_pairs(once), brute_force_core(ds, k)) << "seed " << seed << " k " << k;
      const auto twice = k_core_filter(once, k);
      EXPECT_EQ(twice.records(), once.records());
      EXPECT_EQ(twice.users().ids(), once.users().ids());
      EXPECT_EQ(twice.items().ids(), once.items().ids());
    }
  }
}

// ---- splits --------------------------------------------------------------------

TEST(RandomSplit, ExactProportionsAndDeterminism) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index n = 0; n < 10; ++n) pairs.emplace_back(n % 3, n);
  const auto ds = index_dataset(3, 10, pairs);
  const auto a = random_split(ds, {0.6, 0.1, 0.3}, 42);
  EXPECT_EQ(a.train.size(), 6u);
  EXPECT_EQ(a.validation.size(), 1u);
  EXPECT_EQ(a.test.size(), 3u);
  const auto b = random_split(ds, {0.6, 0.1, 0.3}, 42);
  EXPECT_EQ(a.train.records(), b.train.records());
  EXPECT_EQ(a.validation.records(), b.validation.records());
  EXPECT_EQ(a.test.records(), b.test.records());
  EXPECT_TRUE(a.train.shares_maps_with(a.test));
}

TEST(RandomSplit, RejectsRatiosNotSummingToOne) {
  const auto ds = pairs_dataset({{"a", "1"}});
  EXPECT_EQ(code_of([&] { random_split(ds, {0.5, 0.5, 0.5}, 1); }), ErrorCode::config);
  EXPECT_EQ(code_of([&] { random_split(ds, {1.0, 0.0, 0.0}, 1); }), ErrorCode::config);
}

TEST(RandomSplit, PartitionPropertyOnRandomSizes) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ds = random_graph(20, 20, 0.05 + 0.02 * trial, trial);
    const SplitRatios ratios{0.7, 0.1, 0.2};
    const auto s = random_split(ds, ratios, rng());
    std::multiset<std::pair<std::string, std::string>> all;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      const auto p = id_pairs(*part);
      all.insert(p.begin(), p.end());
    }
    EXPECT_EQ(all, id_pairs(ds));
    const double n = double(ds.size());
    EXPECT_LE(std::abs(double(s.train.size()) - 0.7 * n), 1.0);
    EXPECT_LE(std::abs(double(s.validation.size()) - 0.1 * n), 1.0);
    EXPECT_LE(std::abs(double(s.test.size()) - 0.2 * n), 1.0);
  }
}

InteractionDataset timestamped(const std::vector<std::tuple<Index, Index, std::int64_t>>& rows,
                               std::size_t users, std::size_t items) {
  auto base = index_dataset(users, items, {});
  std::vector<Interaction> records;
  for (const auto& [u, i, t] : rows) records.push_back({u, i, std::nullopt, t});
  return base.with_records(records);
}

TEST(TemporalSplit, ChronologicalCuts) {
  std::vector<std::tuple<Index, Index, std::int64_t>> rows;
  for (int t = 10; t >= 1; --t) rows.emplace_back(Index(t % 2), Index(t - 1), t);
  const auto ds = timestamped(rows, 2, 10);
  const auto s = temporal_split(ds, {0.7, 0.1, 0.2}, TemporalMode::by_timestamp);
  ASSERT_EQ(s.train.size(), 7u);
  ASSERT_EQ(s.validation.size(), 1u);
  ASSERT_EQ(s.test.size(), 2u);
  for (const auto& r : s.train.records()) EXPECT_LE(*r.timestamp, 7);
  EXPECT_EQ(*s.validation.records()[0].timestamp, 8);
  for (const auto& r : s.test.records()) EXPECT_GE(*r.timestamp, 9);
}

TEST(TemporalSplit, BoundaryTiesBrokenByUserThenItem) {
  // All ten records share one timestamp; the order is (user, item).
  std::vector<std::tuple<Index, Index, std::int64_t>> rows;
  for (Index u = 5; u-- > 0;) {
    rows.emplace_back(u, 1, 100);
    rows.emplace_back(u, 0, 100);
  }
  const auto s =
      temporal_split(timestamped(rows, 5, 2), {0.5, 0.2, 0.3}, TemporalMode::by_timestamp);
  ASSERT_EQ(s.train.size(), 5u);
  std::set<std::pair<Index, Index>> train;
  for (const auto& r : s.train.records()) train.emplace(r.user, r.item);
  EXPECT_EQ(train, (std::set<std::pair<Index, Index>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}}));
  ASSERT_EQ(s.validation.size(), 2u);
  std::set<std::pair<Index, Index>> val;
  for (const auto& r : s.validation.records()) val.emplace(r.user, r.item);
  EXPECT_EQ(val, (std::set<std::pair<Index, Index>>{{2, 1}, {3, 0}}));
}

TEST(TemporalSplit, WeekendRecordsFormTheTestSet) {
  // 1970-01-01 was a Thursday.
  constexpr std::int64_t kDay = 86400;
  EXPECT_FALSE(is_weekend_utc(0));
  EXPECT_TRUE(is_weekend_utc(2 * kDay));
  EXPECT_TRUE(is_weekend_utc(3 * kDay + kDay - 1));
  EXPECT_FALSE(is_weekend_utc(4 * kDay));
  EXPECT_TRUE(is_weekend_utc(-4 * kDay));  // 1969-12-28, a Sunday

  std::vector<std::tuple<Index, Index, std::int64_t>> rows;
  for (Index d = 0; d < 14; ++d) rows.emplace_back(d % 3, d, std::int64_t(d) * kDay + 3600);
  const auto s = temporal_split(timestamped(rows, 3, 14), {0.5, 0.25, 0.25},
                                TemporalMode::by_weekday);
  for (const auto& r : s.test.records()) EXPECT_TRUE(is_weekend_utc(*r.timestamp));
  EXPECT_EQ(s.test.size(), 4u);
  EXPECT_EQ(s.train.size() + s.validation.size(), 10u);
  EXPECT_EQ(s.train.size(), 7u);  // round(10 * 0.5 / (0.5 + 0.25))
}

TEST(TemporalSplit, AllWeekendIsDegenerate) {
  constexpr std::int64_t kSaturday = 2 * 86400;
  const auto ds = timestamped({{0, 0, kSaturday}, {1, 1, kSaturday + 60}}, 2, 2);
  EXPECT_EQ(code_of([&] { temporal_split(ds, {0.7, 0.1, 0.2}, TemporalMode::by_weekday); }),
            ErrorCode::degenerate_split);
}

TEST(TemporalSplit, MissingTimestampsRejected) {
  const auto ds = pairs_dataset({{"a", "1"}});
  EXPECT_EQ(code_of([&] { temporal_split(ds, {0.7, 0.1, 0.2}, TemporalMode::by_timestamp); }),
            ErrorCode::invalid_input);
}

// ---- long-tail generator -----------------------------------------------------------

// Zipf-like popularity: item i (0-based) has roughly base / (i+1)^0.8 interactions.
InteractionDataset zipf_dataset(std::size_t n_items, std::size_t base, std::size_t n_users) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n_items; ++i) {
    const auto count = std::max<std::size_t>(
        2, std::size_t(double(base) / std::pow(double(i + 1), 0.8)));
    for (std::size_t c = 0; c < std::min(count, n_users); ++c) {
      pairs.emplace_back(Index((c * 7 + i) % n_users), i);
    }
  }
  return index_dataset(n_users, n_items, pairs);
}

TEST(LongTail, QuotaFormulaValues) {
  EXPECT_EQ(longtail_quotas(100.0, 4.0, 50)[49], 25u);
  const auto flat = longtail_quotas(37.0, 1.0, 50);
  EXPECT_TRUE(std::all_of(flat.begin(), flat.end(), [](std::size_t q) { return q == 37; }));
  const auto steep = longtail_quotas(2000.0, 200.0, 50);
  EXPECT_EQ(steep.front(), 2000u);
  EXPECT_EQ(steep.back(), 10u);
  EXPECT_DOUBLE_EQ(double(steep.back()) / double(steep.front()), 1.0 / 200.0);
}

TEST(LongTail, GammaOneGivesEqualEmpiricalQuotas) {
  const auto ds = zipf_dataset(200, 400, 400);
  const auto res = make_longtail_testset(ds, {1.0, 50, 0.10, 3});
  std::vector<std::size_t> per_group(50, 0);
  std::vector<std::size_t> group_of(ds.n_items());
  for (std::size_t g = 0; g < 50; ++g)
    for (auto i : res.groups[g]) group_of[i] = g;
  for (const auto& r : res.test.records()) ++per_group[group_of[r.item]];
  for (auto q : per_group) EXPECT_EQ(q, per_group.front());
  EXPECT_LE(double(res.test.size()), 0.10 * double(ds.size()));
}

TEST(LongTail, MultisetPartitionAndQuotaRatios) {
  const auto ds = zipf_dataset(300, 500, 600);
  for (double gamma : {2.0, 10.0, 200.0}) {
    const auto res = make_longtail_testset(ds, {gamma, 50, 0.10, 11});
    auto both = id_pairs(res.test);
    const auto rest = id_pairs(res.remainder);
    both.insert(rest.begin(), rest.end());
    EXPECT_EQ(both, id_pairs(ds));
    const double ratio = std::pow(gamma, -1.0 / 49.0);
    for (std::size_t g = 0; g + 1 < 50; ++g) {
      EXPECT_LE(std::abs(double(res.quotas[g + 1]) - ratio * double(res.quotas[g])), 1.0);
    }
    EXPECT_NEAR(double(res.test.size()), 0.10 * double(ds.size()), 50.0);
  }
}

TEST(LongTail, DeterministicForFixedSeed) {
  const auto ds = zipf_dataset(120, 300, 300);
  const auto a = make_longtail_testset(ds, {10.0, 50, 0.1, 9});
  const auto b = make_longtail_testset(ds, {10.0, 50, 0.1, 9});
  EXPECT_EQ(a.test.records(), b.test.records());
  EXPECT_EQ(a.remainder.records(), b.remainder.records());
}

TEST(LongTail, InfeasibleWhenFlatQuotaExceedsTailSupply) {
  // 50 items; the 49 tail items have 1 interaction each, the head item 4000.
  std::vector<std::pair<Index, Index>> pairs;
  for (Index c = 0; c < 4000; ++c) pairs.emplace_back(c, 0);
  for (Index i = 1; i < 50; ++i) pairs.emplace_back(i, i);
  const auto ds = index_dataset(4000, 50, pairs);
  try {
    make_longtail_testset(ds, {1.0, 50, 0.10, 1});
    FAIL() << "expected infeasible spec";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::infeasible_spec);
    EXPECT_NE(std::string(e.what()).find("group 2"), std::string::npos) << e.what();
  }
}

TEST(LongTail, RejectsInvalidSpec) {
  const auto ds = zipf_dataset(60, 100, 100);
  EXPECT_EQ(code_of([&] { make_longtail_testset(ds, {0.0, 50, 0.1, 1}); }), ErrorCode::config);
  EXPECT_EQ(code_of([&] { make_longtail_testset(ds, {2.0, 1, 0.1, 1}); }), ErrorCode::config);
  EXPECT_EQ(code_of([&] { make_longtail_testset(ds, {2.0, 50, 1.0, 1}); }), ErrorCode::config);
}

TEST(LongTail, ProtocolCarvesDisjointTestsThenSplitsRemainder) {
  const auto ds = zipf_dataset(300, 500, 600);
  const auto p = longtail_protocol(ds, {200.0, 10.0, 2.0}, 0.10, 6.0 / 7.0, 4);
  ASSERT_EQ(p.tests.size(), 3u);
  std::size_t total = p.train.size() + p.validation.size();
  auto seen = id_pairs(p.train);
  for (const auto* part : {&p.validation, &p.tests[0], &p.tests[1], &p.tests[2]}) {
    for (const auto& pair : id_pairs(*part)) seen.insert(pair);
  }
  for (const auto& t : p.tests) {
    EXPECT_NEAR(double(t.size()), 0.10 * double(ds.size()), 50.0);
    EXPECT_TRUE(t.shares_maps_with(ds));
    total += t.size();
  }
  EXPECT_EQ(total, ds.size());
  EXPECT_EQ(seen, id_pairs(ds));
  EXPECT_NEAR(double(p.train.size()) / double(p.train.size() + p.validation.size()), 6.0 / 7.0, 1e-3);
  EXPECT_EQ(gamma_name(200), "g200");
  EXPECT_EQ(gamma_name(2.5), "g2.5");
}

// ---- popularity ---------------------------------------------------------------------

TEST(Popularity, CountsAndDistribution) {
  const auto stats = popularity_counts(index_dataset(2, 2, {{0, 0}, {0, 1}, {1, 0}}));
  EXPECT_EQ(stats.item_counts, (std::vector<std::uint64_t>{2, 1}));
  EXPECT_DOUBLE_EQ(stats.item_distribution[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(stats.item_distribution[1], 1.0 / 3.0);
  EXPECT_FALSE(stats.empty);

  const auto empty = popularity_counts(index_dataset(2, 2, {}));
  EXPECT_TRUE(empty.empty);
  EXPECT_TRUE(empty.item_distribution.empty());

  const auto uniform = popularity_counts(index_dataset(1, 4, {{0, 0}, {0, 1}, {0, 2}, {0, 3}}));
  for (double p : uniform.item_distribution) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Popularity, KlDivergence) {
  const auto p = popularity_counts(index_dataset(4, 2, {{0, 0}, {1, 0}, {2, 0}, {3, 1}}));
  const auto q = popularity_counts(index_dataset(4, 2, {{0, 0}, {1, 1}}));
  EXPECT_EQ(popularity_kl(p, p), 0.0);
  // 0.75 ln(1.5) + 0.25 ln(0.5)
  EXPECT_NEAR(popularity_kl(p, q), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-9);
  EXPECT_NEAR(popularity_kl(p, q), 0.1308, 1e-4);
  const auto other = popularity_counts(index_dataset(4, 3, {{0, 0}}));
  EXPECT_EQ(code_of([&] { popularity_kl(p, other); }), ErrorCode::invalid_input);
}

TEST(Popularity, KlIsNonNegativeOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = popularity_counts(random_graph(10, 8, 0.4, seed));
    const auto b = popularity_counts(random_graph(10, 8, 0.4, seed + 100));
    if (a.empty || b.empty) continue;
    EXPECT_GE(popularity_kl(a, b), 0.0);
  }
}

TEST(Popularity, ThirdPartitionAssignsTiesToMorePopularGroup) {
  const std::vector<std::uint64_t> counts{9, 1, 5, 5, 5, 2};
  const auto g = third_partition(counts);
  // Head cut after two entities (9, 5) pulls in every 5.
  EXPECT_EQ(g[0], PopularityGroup::head);
  EXPECT_EQ(g[2], PopularityGroup::head);
  EXPECT_EQ(g[3], PopularityGroup::head);
  EXPECT_EQ(g[4], PopularityGroup::head);
  EXPECT_EQ(g[5], PopularityGroup::tail);
  EXPECT_EQ(g[1], PopularityGroup::tail);
  const std::vector<std::uint64_t> distinct{6, 5, 4, 3, 2, 1};
  const auto d = third_partition(distinct);
  EXPECT_EQ(d, (std::vector<PopularityGroup>{PopularityGroup::head, PopularityGroup::head,
                                             PopularityGroup::mid, PopularityGroup::mid,
                                             PopularityGroup::tail, PopularityGroup::tail}));
}

TEST(Subgroups, HeadOnlyInteractionsFillOneCell) {
  // Users 0..2 and items 0..2; only user 0 / item 0 is ever touched.
  const auto train = index_dataset(3, 3, {{0, 0}, {0, 0}});
  const auto test = index_dataset(3, 3, {{0, 0}});
  const auto rep = subgroup_histogram(train, test);
  EXPECT_EQ(rep.train.cells[0][0], 2u);
  EXPECT_EQ(rep.test.cells[0][0], 1u);
  std::uint64_t rest = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a || b) rest += rep.train.cells[a][b] + rep.test.cells[a][b];
  EXPECT_EQ(rest, 0u);
}

TEST(Subgroups, ToyGridMatchesHandTally) {
  // 9x9 grid minus nine pairs so user and item degrees are 9/8/7 by thirds.
  const std::set<std::pair<Index, Index>> removed{{3, 6}, {4, 7}, {5, 8}, {6, 3}, {6, 6},
                                                  {7, 4}, {7, 7}, {8, 5}, {8, 8}};
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 9; ++u)
    for (Index i = 0; i < 9; ++i)
      if (!removed.count({u, i})) pairs.emplace_back(u, i);
  const auto train = index_dataset(9, 9, pairs);
  const auto rep = subgroup_histogram(train, index_dataset(9, 9, {}));

  // Brute-force tally with groups read straight off the index.
  std::array<std::array<std::uint64_t, 3>, 3> tally{};
  for (const auto& [u, i] : pairs) ++tally[u / 3][i / 3];
  EXPECT_EQ(rep.train.cells, tally);
  const std::array<std::array<std::uint64_t, 3>, 3> frozen{{{9, 9, 9}, {9, 9, 6}, {9, 6, 6}}};
  EXPECT_EQ(rep.train.cells, frozen);
  EXPECT_EQ(rep.train.total, 72u);
}

TEST(Subgroups, CellsConserveSplitSizes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = random_graph(15, 15, 0.3, seed);
    const auto s = random_split(ds, {0.6, 0.1, 0.3}, seed);
    const auto rep = subgroup_histogram(s.train, s.test);
    for (const auto* h : {&rep.train, &rep.test}) {
      std::uint64_t sum = 0;
      for (const auto& row : h->cells)
        for (auto c : row) sum += c;
      EXPECT_EQ(sum, h->total);
    }
    EXPECT_EQ(rep.train.total, s.train.size());
    EXPECT_EQ(rep.test.total, s.test.size());
  }
}

}  // namespace
