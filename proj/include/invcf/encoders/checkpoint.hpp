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

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "invcf/encoders/model.hpp"

namespace invcf::encoders {

inline constexpr std::string_view kCheckpointMagic = "INVCF-CKPT-1";

/// Layout: the magic line, an 8-byte little-endian header length, a JSON
/// header, then the raw tables (pref_user, pref_item, pop_user, pop_item in
/// the header's scalar type) and the two uint32 category maps.
struct Checkpoint {
  std::variant<ModelParams<float>, ModelParams<double>> params;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace invcf::encoders
