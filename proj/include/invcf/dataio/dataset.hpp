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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace invcf::dataio {

using Index = std::uint32_t;

/// Bijection between external string ids and dense indices [0, size()).
class IndexMap {
 public:
  Index intern(std::string_view id);
  std::optional<Index> find(std::string_view id) const;
  const std::string& id(Index index) const { return ids_.at(index); }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> index_;
};

struct Interaction {
  Index user = 0;
  Index item = 0;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

/// Implicit-feedback records over shared user/item index maps. Split views
/// built from one source share the same maps, so indices agree across them.
class InteractionDataset {
 public:
  InteractionDataset();
  InteractionDataset(std::shared_ptr<const IndexMap> users,
                     std::shared_ptr<const IndexMap> items,
                     std::vector<Interaction> records);

  std::size_t n_users() const noexcept { return users_->size(); }
  std::size_t n_items() const noexcept { return items_->size(); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const std::vector<Interaction>& records() const noexcept { return records_; }
  const IndexMap& users() const noexcept { return *users_; }
  const IndexMap& items() const noexcept { return *items_; }
  const std::shared_ptr<const IndexMap>& user_map() const noexcept { return users_; }
  const std::shared_ptr<const IndexMap>& item_map() const noexcept { return items_; }

  /// Same index maps, different records.
  InteractionDataset with_records(std::vector<Interaction> records) const;

  bool has_ratings() const noexcept;
  bool has_timestamps() const noexcept;
  bool has_duplicate_pairs() const;
  bool shares_maps_with(const InteractionDataset& other) const noexcept {
    return users_ == other.users_ && items_ == other.items_;
  }

  /// Per-user sorted item lists.
  std::vector<std::vector<Index>> items_by_user() const;

 private:
  std::shared_ptr<const IndexMap> users_;
  std::shared_ptr<const IndexMap> items_;
  std::vector<Interaction> records_;
};

/// Which delimited columns hold the user id, item id, rating and timestamp.
struct ColumnLayout {
  std::size_t user = 0;
  std::size_t item = 1;
  std::optional<std::size_t> rating;
  std::optional<std::size_t> timestamp;

  /// Parses a letter code, one letter per column: u=user, i=item, r=rating,
  /// t=timestamp, x=ignored. "uirt" is the MovieLens-style layout.
  static ColumnLayout parse(std::string_view code);
  std::string code() const;
  std::size_t min_columns() const noexcept;
};

struct LoadOptions {
  ColumnLayout layout;
  // When set, ids are resolved against these maps instead of being interned;
  // an unknown id is a parse error.
  std::shared_ptr<const IndexMap> fixed_users;
  std::shared_ptr<const IndexMap> fixed_items;
};

InteractionDataset load_interactions(const std::filesystem::path& path,
                                     const LoadOptions& options = {});
InteractionDataset parse_interactions(std::string_view text,
                                      const LoadOptions& options = {});

/// Writes user and item external ids, tab separated, plus whichever of
/// rating/timestamp every record carries. Returns the layout written.
ColumnLayout write_interactions(const std::filesystem::path& path,
                                const InteractionDataset& dataset);
void write_index_map(const std::filesystem::path& path, const IndexMap& map);
std::shared_ptr<const IndexMap> read_index_map(const std::filesystem::path& path);

}  // namespace invcf::dataio
