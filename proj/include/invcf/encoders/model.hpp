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
#include <span>
#include <string>
#include <vector>

#include "invcf/dataio/dataset.hpp"
#include "invcf/dataio/popularity.hpp"
#include "invcf/matrix.hpp"

namespace invcf::encoders {

using dataio::Index;

enum class Backbone { mf, lightgcn };

const char* to_string(Backbone backbone) noexcept;
Backbone parse_backbone(std::string_view name);

/// Entity -> category index, with categories ordered by ascending count.
struct CategoryMap {
  std::vector<std::uint32_t> category_of;
  // Smallest interaction count that maps to each category.
  std::vector<std::uint64_t> vocabulary;

  std::size_t n_categories() const noexcept { return vocabulary.size(); }
};

struct PopularityCategories {
  CategoryMap users;
  CategoryMap items;
};

/// Interaction counts treated as categorical ids. With bucket_width w > 1,
/// counts are first bucketed as count / w.
PopularityCategories pop_categorize(const dataio::PopularityStats& stats,
                                    std::uint64_t bucket_width = 1);

/// Preference tables are indexed by entity, popularity tables by category.
template <typename Real>
struct ModelParams {
  Backbone backbone = Backbone::mf;
  std::uint32_t layers = 0;
  std::size_t dim = 0;
  Matrix<Real> pref_user;
  Matrix<Real> pref_item;
  Matrix<Real> pop_user;
  Matrix<Real> pop_item;
  std::vector<std::uint32_t> user_category_of;
  std::vector<std::uint32_t> item_category_of;
  std::uint64_t seed = 0;

  std::size_t n_users() const noexcept { return pref_user.rows(); }
  std::size_t n_items() const noexcept { return pref_item.rows(); }

  // Throws unless shapes agree, category maps are total and every entry is finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Xavier-uniform tables drawn from one seeded stream, in the order
/// pref_user, pref_item, pop_user, pop_item.
template <typename Real>
ModelParams<Real> init_params(Backbone backbone, std::uint32_t layers, std::size_t dim,
                              std::size_t n_users, std::size_t n_items,
                              const PopularityCategories& categories, std::uint64_t seed);

/// Cast between precisions (used to take float checkpoints into double checks).
template <typename To, typename From>
ModelParams<To> convert(const ModelParams<From>& params);

}  // namespace invcf::encoders
