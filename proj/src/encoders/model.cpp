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

#include "invcf/encoders/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "invcf/error.hpp"

namespace invcf::encoders {

const char* to_string(Backbone backbone) noexcept {
  return backbone == Backbone::mf ? "mf" : "lightgcn";
}

Backbone parse_backbone(std::string_view name) {
  if (name == "mf" || name == "MF") return Backbone::mf;
  if (name == "lightgcn" || name == "LightGCN") return Backbone::lightgcn;
  fail(ErrorCode::config, "unknown backbone '" + std::string(name) + "'");
}

namespace {

CategoryMap categorize(const std::vector<std::uint64_t>& counts, std::uint64_t width) {
  std::map<std::uint64_t, std::uint32_t> buckets;
  for (auto c : counts) buckets.emplace(c / width, 0);
  CategoryMap map;
  std::uint32_t next = 0;
  for (auto& [bucket, index] : buckets) {
    index = next++;
    map.vocabulary.push_back(bucket * width);
  }
  map.category_of.reserve(counts.size());
  for (auto c : counts) map.category_of.push_back(buckets.at(c / width));
  return map;
}

template <typename Real>
void xavier_fill(Matrix<Real>& table, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / double(table.rows() + table.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : table.values()) x = static_cast<Real>(dist(rng));
}

}  // namespace

PopularityCategories pop_categorize(const dataio::PopularityStats& stats,
                                    std::uint64_t bucket_width) {
  if (bucket_width == 0) fail(ErrorCode::config, "popularity bucket width must be >= 1");
  return {categorize(stats.user_counts, bucket_width), categorize(stats.item_counts, bucket_width)};
}

template <typename Real>
void ModelParams<Real>::validate() const {
  if (dim == 0) fail(ErrorCode::invalid_input, "embedding dimension must be >= 1");
  for (const auto* t : {&pref_user, &pref_item, &pop_user, &pop_item}) {
    if (t->cols() != dim) fail(ErrorCode::invalid_input, "table width differs from dim");
    for (Real x : t->values()) {
      if (!std::isfinite(x)) fail(ErrorCode::numeric, "non-finite parameter");
    }
  }
  if (user_category_of.size() != pref_user.rows() || item_category_of.size() != pref_item.rows()) {
    fail(ErrorCode::invalid_input, "category maps must cover every entity");
  }
  for (auto c : user_category_of) {
    if (c >= pop_user.rows()) fail(ErrorCode::index, "user category out of range");
  }
  for (auto c : item_category_of) {
    if (c >= pop_item.rows()) fail(ErrorCode::index, "item category out of range");
  }
}

template <typename Real>
ModelParams<Real> init_params(Backbone backbone, std::uint32_t layers, std::size_t dim,
                              std::size_t n_users, std::size_t n_items,
                              const PopularityCategories& categories, std::uint64_t seed) {
  if (dim == 0) fail(ErrorCode::config, "embedding dimension must be >= 1");
  if (categories.users.category_of.size() != n_users ||
      categories.items.category_of.size() != n_items) {
    fail(ErrorCode::invalid_input, "category maps do not match entity counts");
  }
  ModelParams<Real> p;
  p.backbone = backbone;
  p.layers = backbone == Backbone::mf ? 0 : layers;
  p.dim = dim;
  p.seed = seed;
  p.pref_user = Matrix<Real>(n_users, dim);
  p.pref_item = Matrix<Real>(n_items, dim);
  p.pop_user = Matrix<Real>(std::max<std::size_t>(categories.users.n_categories(), 1), dim);
  p.pop_item = Matrix<Real>(std::max<std::size_t>(categories.items.n_categories(), 1), dim);
  p.user_category_of = categories.users.category_of;
  p.item_category_of = categories.items.category_of;
  std::mt19937_64 rng(seed);
  xavier_fill(p.pref_user, rng);
  xavier_fill(p.pref_item, rng);
  xavier_fill(p.pop_user, rng);
  xavier_fill(p.pop_item, rng);
  return p;
}

template <typename To, typename From>
ModelParams<To> convert(const ModelParams<From>& in) {
  const auto cast = [](const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    std::transform(m.values().begin(), m.values().end(), out.values().begin(),
                   [](From x) { return static_cast<To>(x); });
    return out;
  };
  ModelParams<To> out;
  out.backbone = in.backbone;
  out.layers = in.layers;
  out.dim = in.dim;
  out.pref_user = cast(in.pref_user);
  out.pref_item = cast(in.pref_item);
  out.pop_user = cast(in.pop_user);
  out.pop_item = cast(in.pop_item);
  out.user_category_of = in.user_category_of;
  out.item_category_of = in.item_category_of;
  out.seed = in.seed;
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params<float>(Backbone, std::uint32_t, std::size_t, std::size_t,
                                               std::size_t, const PopularityCategories&,
                                               std::uint64_t);
template ModelParams<double> init_params<double>(Backbone, std::uint32_t, std::size_t,
                                                 std::size_t, std::size_t,
                                                 const PopularityCategories&, std::uint64_t);
template ModelParams<double> convert<double, float>(const ModelParams<float>&);
template ModelParams<float> convert<float, double>(const ModelParams<double>&);
template ModelParams<float> convert<float, float>(const ModelParams<float>&);
template ModelParams<double> convert<double, double>(const ModelParams<double>&);

}  // namespace invcf::encoders
