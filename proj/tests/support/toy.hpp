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

#include <random>
#include <utility>
#include <vector>

#include "invcf/encoders/encoder.hpp"
#include "invcf/losses/objective.hpp"
#include "support/fixtures.hpp"

namespace invcf::testing {

using dataio::Index;

// 6 users x 8 items with staircase degrees, d = 4, and a 5-pair batch with
// 3 sampled negatives each. Parameters are Xavier draws scaled by 3.
struct Toy {
  encoders::ModelParams<double> params;
  encoders::InteractionGraph graph;
  losses::EntityGroups groups;
  losses::StepBatch batch;
};

inline Toy make_toy(encoders::Backbone backbone, std::uint32_t layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < 6; ++u) {
    for (Index i = 0; i < 8; ++i) {
      // Staircase degrees keep popularity categories (and rows) distinct.
      if (i <= u + 1 || (u + i + seed) % 5 == 0) pairs.emplace_back(u, i);
    }
  }
  const auto train = index_dataset(6, 8, pairs);
  const auto stats = dataio::popularity_counts(train);
  Toy t{encoders::init_params<double>(backbone, layers, 4, 6, 8, encoders::pop_categorize(stats), seed),
        encoders::InteractionGraph::build(train), losses::EntityGroups::from_stats(stats), {}};
  // Scale up from Xavier so the softmax is not saturated at uniform.
  for (auto* m : {&t.params.pref_user, &t.params.pref_item, &t.params.pop_user, &t.params.pop_item}) {
    for (auto& v : m->values()) v *= 3;
  }
  t.batch.n_negatives = 3;
  std::uniform_int_distribution<Index> item(0, 7);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& [u, i] = pairs[(k * 7 + seed) % pairs.size()];
    t.batch.users.push_back(u);
    t.batch.items.push_back(i);
    for (int j = 0; j < 3; ++j) t.batch.negatives.push_back(item(rng));
  }
  return t;
}

}  // namespace invcf::testing
