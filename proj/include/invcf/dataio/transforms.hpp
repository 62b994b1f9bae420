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

#include <cstdint>

#include "invcf/dataio/dataset.hpp"

namespace invcf::dataio {

/// Keeps records rated at or above `threshold`, drops ratings and collapses
/// repeated (user, item) pairs onto their first occurrence.
InteractionDataset binarize(const InteractionDataset& dataset, double threshold = 4.0);

/// Collapses repeated (user, item) pairs onto their first occurrence.
InteractionDataset deduplicate(const InteractionDataset& dataset);

/// Removes users and items with fewer than k interactions until no more
/// removals happen, then re-densifies both index maps in their old order.
InteractionDataset k_core_filter(const InteractionDataset& dataset, std::uint32_t k = 10);

}  // namespace invcf::dataio
