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
#include <filesystem>

#include "invcf/analysis/analysis.hpp"
#include "invcf/error.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace invcf;
using namespace invcf::analysis;
using dataio::Index;
namespace tt = invcf::testing;

dataio::InteractionDataset toy_train() {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 7; ++u) {
    for (Index i = 0; i < 9; ++i) {
      if (i <= u || (u + 2 * i) % 5 == 0) pairs.emplace_back(u, i);
    }
  }
  return tt::index_dataset(7, 9, pairs);
}

encoders::ModelParams<double> toy_params(const dataio::InteractionDataset& train,
                                         encoders::Backbone backbone, std::size_t dim = 3) {
  const auto cats = encoders::pop_categorize(dataio::popularity_counts(train));
  return encoders::init_params<double>(backbone, 2, dim, train.n_users(), train.n_items(), cats, 4);
}

TEST(Angles, Examples) {
  const std::vector<double> x{1, 0}, y{0, 2}, z{1, 1}, w{-3, 0};
  EXPECT_NEAR(*angle_degrees(x, x), 0.0, 1e-12);
  EXPECT_NEAR(*angle_degrees(x, y), 90.0, 1e-12);
  EXPECT_NEAR(*angle_degrees(x, z), 45.0, 1e-12);
  EXPECT_NEAR(*angle_degrees(x, w), 180.0, 1e-12);
  EXPECT_FALSE(angle_degrees(x, std::vector<double>{0, 0}).has_value());
}

TEST(Angles, SummaryAndHistogram) {
  const auto r = summarize_angles({10.2, std::nullopt, 10.9, 30.0, 180.0});
  EXPECT_EQ(r.flagged, std::vector<Index>{1});
  EXPECT_EQ(r.n_scored(), 4u);
  ASSERT_EQ(r.histogram.size(), 180u);
  EXPECT_EQ(r.histogram[10], 2u);
  EXPECT_EQ(r.histogram[30], 1u);
  EXPECT_EQ(r.histogram[179], 1u);
  EXPECT_DOUBLE_EQ(r.mean, (10.2 + 10.9 + 30 + 180) / 4);
  double ss = 0;
  for (double a : {10.2, 10.9, 30.0, 180.0}) ss += (a - r.mean) * (a - r.mean);
  EXPECT_NEAR(r.stddev, std::sqrt(ss / 4), 1e-12);
}

TEST(Angles, ModelDistributionInvariants) {
  const auto train = toy_train();
  for (auto bb : {encoders::Backbone::mf, encoders::Backbone::lightgcn}) {
    const auto params = toy_params(train, bb);
    encoders::InteractionGraph graph = encoders::InteractionGraph::build(train);
    const auto r = angle_distribution(params, &graph);
    ASSERT_EQ(r.angles.size(), train.n_items());
    std::uint64_t sum = 0;
    for (auto c : r.histogram) sum += c;
    EXPECT_EQ(sum, r.n_scored());
    for (const auto& a : r.angles) {
      ASSERT_TRUE(a.has_value());
      EXPECT_GE(*a, 0.0);
      EXPECT_LE(*a, 180.0);
    }

    // Positive rescaling of either encoder leaves every angle unchanged. The
    // LightGCN encoders are linear in their user and item tables jointly.
    auto scaled = params;
    for (auto* m : {&scaled.pref_user, &scaled.pref_item}) {
      for (auto& v : m->values()) v *= 2.5;
    }
    for (auto* m : {&scaled.pop_user, &scaled.pop_item}) {
      for (auto& v : m->values()) v *= 0.3;
    }
    const auto s = angle_distribution(scaled, &graph);
    for (std::size_t i = 0; i < r.angles.size(); ++i) EXPECT_NEAR(*s.angles[i], *r.angles[i], 1e-9);
  }
}

TEST(Angles, ZeroRowIsFlagged) {
  const auto train = toy_train();
  auto params = toy_params(train, encoders::Backbone::mf);
  for (std::size_t c = 0; c < params.dim; ++c) params.pref_item(4, c) = 0;
  const auto r = angle_distribution(params, nullptr);
  EXPECT_EQ(r.flagged, std::vector<Index>{4});
  EXPECT_FALSE(r.angles[4].has_value());
  const auto j = r.to_json({"INVCF", 1, {}});
  EXPECT_TRUE(j["angles_deg"][4].is_null());
  const auto back = AngleReport::from_json(j);
  EXPECT_EQ(back.histogram, r.histogram);
  EXPECT_EQ(back.mean, r.mean);
}

TEST(Export, ItemsAreUnitNorm) {
  const auto train = toy_train();
  const auto params = toy_params(train, encoders::Backbone::mf);
  const auto e = export_embeddings(params, nullptr, train, Selection::parse("items:i0,i2,i3,i5,i8"),
                                   {"INVCF", 1, {}});
  ASSERT_EQ(e.records.size(), 5u);
  EXPECT_EQ(e.records[1].id, "i2");
  EXPECT_EQ(e.dim, 3u);
  for (const auto& r : e.records) {
    double a = 0, b = 0;
    for (double x : r.pref) a += x * x;
    for (double x : r.pop) b += x * x;
    EXPECT_NEAR(std::sqrt(a), 1.0, 1e-6);
    EXPECT_NEAR(std::sqrt(b), 1.0, 1e-6);
  }
}

TEST(Export, HistoryHasOneRecordPerTrainItem) {
  const auto train = toy_train();
  const auto params = toy_params(train, encoders::Backbone::lightgcn);
  const auto graph = encoders::InteractionGraph::build(train);
  const auto stats = dataio::popularity_counts(train);
  const auto e = export_embeddings(params, &graph, train, Selection::parse("history:u3"), {"ERM_SOFTMAX", 2, {}});
  EXPECT_EQ(e.records.size(), stats.user_counts[3]);
  ASSERT_EQ(e.focal.size(), 1u);
  EXPECT_EQ(e.focal[0].id, "u3");
  for (const auto& r : e.records) {
    EXPECT_EQ(r.owner, "u3");
    EXPECT_EQ(r.popularity, stats.item_counts[r.index]);
  }
}

TEST(Export, HeadTailPicksMostActiveOfEachGroup) {
  const auto train = toy_train();
  const auto params = toy_params(train, encoders::Backbone::mf);
  const auto stats = dataio::popularity_counts(train);
  const auto groups = dataio::third_partition(stats.user_counts);
  const auto e = export_embeddings(params, nullptr, train, Selection::parse("head-tail"), {"INVCF", 1, {}});
  ASSERT_EQ(e.focal.size(), 2u);
  EXPECT_EQ(groups[e.focal[0].index], dataio::PopularityGroup::head);
  EXPECT_EQ(groups[e.focal[1].index], dataio::PopularityGroup::tail);
  for (Index u = 0; u < groups.size(); ++u) {
    if (groups[u] == dataio::PopularityGroup::head) {
      EXPECT_LE(stats.user_counts[u], e.focal[0].popularity);
    }
    if (groups[u] == dataio::PopularityGroup::tail) {
      EXPECT_LE(stats.user_counts[u], e.focal[1].popularity);
    }
  }
  EXPECT_EQ(e.records.size(), e.focal[0].popularity + e.focal[1].popularity);
}

TEST(Export, UnknownEntityIsNamed) {
  const auto train = toy_train();
  const auto params = toy_params(train, encoders::Backbone::mf);
  try {
    export_embeddings(params, nullptr, train, Selection::parse("items:i1,nope"), {"INVCF", 1, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::index);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
  EXPECT_THROW(Selection::parse("friends:u1"), Error);
  EXPECT_THROW(Selection::parse("items:"), Error);
}

TEST(Export, FileRoundTrip) {
  const auto train = toy_train();
  auto params = toy_params(train, encoders::Backbone::mf);
  for (std::size_t c = 0; c < params.dim; ++c) params.pref_item(0, c) = 0;
  const auto e = export_embeddings(params, nullptr, train, Selection::parse("history:u6"), {"INVCF", 3, {{"k", 1}}});
  const auto path = std::filesystem::temp_directory_path() / "invcf_export_roundtrip" /
                    export_filename("sphere", "INVCF", 3);
  write_json(path, e.to_json());
  EXPECT_EQ(path.filename(), "sphere_invcf_seed3.json");
  const auto back = EmbeddingExport::from_json(read_json(path));
  ASSERT_EQ(back.records.size(), e.records.size());
  EXPECT_TRUE(back.records[0].pref_zero);
  for (std::size_t k = 0; k < e.records.size(); ++k) {
    for (std::size_t c = 0; c < e.dim; ++c) {
      EXPECT_NEAR(back.records[k].pref[c], e.records[k].pref[c], 1e-9);
      EXPECT_NEAR(back.records[k].pop[c], e.records[k].pop[c], 1e-9);
    }
  }
  EXPECT_EQ(back.meta.extra["k"], 1);
  std::filesystem::remove_all(path.parent_path());
}

TEST(PopularityReport, IdenticalSplitsAndTotals) {
  const auto train = toy_train();
  const dataio::SplitBundle same{train, train.with_records({}), train};
  const auto j = export_popularity_report(same);
  EXPECT_EQ(j["kl"].get<double>(), 0.0);
  for (const char* side : {"train", "test"}) {
    std::uint64_t sum = 0;
    for (const auto& row : j[side]["cells"]) {
      for (const auto& c : row) sum += c.get<std::uint64_t>();
    }
    EXPECT_EQ(sum, train.size());
    EXPECT_EQ(j[side]["total"].get<std::uint64_t>(), train.size());
  }
  EXPECT_EQ(j["item_groups"].size(), train.n_items());
}

}  // namespace
