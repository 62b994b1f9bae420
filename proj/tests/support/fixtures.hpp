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

#include <string>
#include <utility>
#include <vector>

#include "invcf/dataio/dataset.hpp"

namespace invcf::testing {

// Builds a dataset from (user, item) id pairs; ids are interned in order.
inline dataio::InteractionDataset pairs_dataset(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string text;
  for (const auto& [u, i] : pairs) text += u + "\t" + i + "\n";
  return dataio::parse_interactions(text);
}

// Dense-index pairs; ids are "u<k>" / "i<k>" and every index up to the given
// sizes is present in the maps even without interactions.
inline dataio::InteractionDataset index_dataset(
    std::size_t n_users, std::size_t n_items,
    const std::vector<std::pair<dataio::Index, dataio::Index>>& pairs) {
  auto users = std::make_shared<dataio::IndexMap>();
  auto items = std::make_shared<dataio::IndexMap>();
  for (std::size_t u = 0; u < n_users; ++u) users->intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < n_items; ++i) items->intern("i" + std::to_string(i));
  std::vector<dataio::Interaction> records;
  for (const auto& [u, i] : pairs) records.push_back({u, i, std::nullopt, std::nullopt});
  return dataio::InteractionDataset(users, items, std::move(records));
}

}  // namespace invcf::testing
