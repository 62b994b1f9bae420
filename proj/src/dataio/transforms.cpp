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

#include "invcf/dataio/transforms.hpp"

#include <unordered_set>

#include "invcf/error.hpp"

namespace invcf::dataio {
namespace {

std::uint64_t pair_key(const Interaction& r) {
  return (std::uint64_t{r.user} << 32) | r.item;
}

}  // namespace

InteractionDataset binarize(const InteractionDataset& dataset, double threshold) {
  if (!dataset.has_ratings()) {
    fail(ErrorCode::invalid_input, "binarize requires a rating on every record");
  }
  std::vector<Interaction> kept;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : dataset.records()) {
    if (*r.rating < threshold) continue;
    if (!seen.insert(pair_key(r)).second) continue;
    Interaction out = r;
    out.rating.reset();
    kept.push_back(out);
  }
  return dataset.with_records(std::move(kept));
}

InteractionDataset deduplicate(const InteractionDataset& dataset) {
  std::vector<Interaction> kept;
  kept.reserve(dataset.size());
  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : dataset.records()) {
    if (seen.insert(pair_key(r)).second) kept.push_back(r);
  }
  return dataset.with_records(std::move(kept));
}

InteractionDataset k_core_filter(const InteractionDataset& dataset, std::uint32_t k) {
  if (k < 1) fail(ErrorCode::config, "k-core requires k >= 1");
  const auto& records = dataset.records();
  std::vector<std::uint64_t> user_deg(dataset.n_users(), 0);
  std::vector<std::uint64_t> item_deg(dataset.n_items(), 0);
  for (const auto& r : records) {
    ++user_deg[r.user];
    ++item_deg[r.item];
  }
  std::vector<char> alive(records.size(), 1);
  // Simultaneous-round peeling; the fixpoint (the k-core) does not depend on
  // removal order.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t n = 0; n < records.size(); ++n) {
      if (!alive[n]) continue;
      const auto& r = records[n];
      if (user_deg[r.user] < k || item_deg[r.item] < k) {
        alive[n] = 0;
        changed = true;
      }
    }
    if (!changed) break;
    std::fill(user_deg.begin(), user_deg.end(), 0);
    std::fill(item_deg.begin(), item_deg.end(), 0);
    for (std::size_t n = 0; n < records.size(); ++n) {
      if (!alive[n]) continue;
      ++user_deg[records[n].user];
      ++item_deg[records[n].item];
    }
  }

  constexpr Index kDropped = ~Index{0};
  auto users = std::make_shared<IndexMap>();
  auto items = std::make_shared<IndexMap>();
  std::vector<Index> user_remap(dataset.n_users(), kDropped);
  std::vector<Index> item_remap(dataset.n_items(), kDropped);
  for (Index u = 0; u < dataset.n_users(); ++u) {
    if (user_deg[u] > 0) user_remap[u] = users->intern(dataset.users().id(u));
  }
  for (Index i = 0; i < dataset.n_items(); ++i) {
    if (item_deg[i] > 0) item_remap[i] = items->intern(dataset.items().id(i));
  }
  std::vector<Interaction> kept;
  for (std::size_t n = 0; n < records.size(); ++n) {
    if (!alive[n]) continue;
    Interaction r = records[n];
    r.user = user_remap[r.user];
    r.item = item_remap[r.item];
    kept.push_back(r);
  }
  return InteractionDataset(std::move(users), std::move(items), std::move(kept));
}

}  // namespace invcf::dataio
