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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "invcf/dataio/split.hpp"
#include "invcf/encoders/encoder.hpp"

namespace invcf::analysis {

using dataio::Index;

/// Run identity carried into every export.
struct ExportMeta {
  std::string method;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();
};

/// Per-item angle between the final preference and popularity
/// representations. Items with a zero-norm side are flagged, get no angle
/// and stay out of the summary and histogram.
struct AngleReport {
  std::vector<std::optional<double>> angles;  // degrees, by item index
  std::vector<Index> flagged;
  double mean = 0;
  double stddev = 0;  // population (divides by the unflagged count)
  // 180 one-degree bins [k, k+1); exactly 180 lands in the last bin.
  std::vector<std::uint64_t> histogram;

  std::size_t n_scored() const noexcept { return angles.size() - flagged.size(); }
  nlohmann::json to_json(const ExportMeta& meta) const;
  static AngleReport from_json(const nlohmann::json& j);
};

/// Angle in degrees between two vectors; nullopt if either has zero norm.
std::optional<double> angle_degrees(std::span<const double> a, std::span<const double> b);

/// Summarize precomputed per-item angles.
AngleReport summarize_angles(std::vector<std::optional<double>> angles);

template <typename Real>
AngleReport angle_distribution(const encoders::ModelParams<Real>& params,
                               const encoders::InteractionGraph* graph);

enum class EntityKind { user, item };

const char* to_string(EntityKind kind) noexcept;

struct EmbeddingRecord {
  EntityKind kind = EntityKind::item;
  Index index = 0;
  std::string id;
  std::uint64_t popularity = 0;  // train interaction count
  std::vector<double> pref;      // unit norm unless pref_zero
  std::vector<double> pop;
  bool pref_zero = false;
  bool pop_zero = false;
  std::string owner;  // focal user id for history selections, else empty
};

struct EmbeddingExport {
  std::size_t dim = 0;
  std::string backbone;
  ExportMeta meta;
  std::vector<EmbeddingRecord> focal;  // the selected users themselves
  std::vector<EmbeddingRecord> records;

  nlohmann::json to_json() const;
  static EmbeddingExport from_json(const nlohmann::json& j);
};

struct Selection {
  enum class Kind { items, users, user_history, head_tail };
  Kind kind = Kind::items;
  // External ids: items for `items`, users for `users` and `user_history`.
  std::vector<std::string> ids;

  static Selection parse(std::string_view text);
};

/// Records for the selection, in selection order. user_history emits one
/// record per distinct train item of each user (ascending item index).
/// head_tail picks the most active user of the head group and of the tail
/// group and emits both histories. Unknown ids raise index naming the id.
template <typename Real>
EmbeddingExport export_embeddings(const encoders::ModelParams<Real>& params,
                                  const encoders::InteractionGraph* graph,
                                  const dataio::InteractionDataset& train,
                                  const Selection& selection, const ExportMeta& meta);

/// Train/test subgroup histograms with the item-popularity KL between them.
nlohmann::json export_popularity_report(const dataio::SplitBundle& splits);

/// "<kind>_<method>_seed<k>.json" with the method lowercased.
std::string export_filename(std::string_view kind, std::string_view method, std::uint64_t seed);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace invcf::analysis
