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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "invcf/dataio/split.hpp"
#include "invcf/eval/metrics.hpp"
#include "invcf/trainer/trainer.hpp"

namespace invcf::cli {

/// Flat dotted-key configuration ("train.method", "loss.lambda1", ...).
/// Every key has a default; file values and flags may only set known keys
/// and must match the default's JSON type (integers may fill number keys).
class RunConfig {
 public:
  RunConfig();

  static const nlohmann::json& defaults();

  /// Accepts a flat object or a run manifest (its "config" member).
  void merge_file(const std::filesystem::path& path);
  void merge(const nlohmann::json& flat);
  /// Flag text: numbers parse as numbers, lists as comma-separated values.
  void set_from_string(const std::string& key, const std::string& text);

  const nlohmann::json& at(const std::string& key) const;
  const nlohmann::json& values() const noexcept { return values_; }

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  std::uint64_t uint(const std::string& key) const;
  std::vector<double> nums(const std::string& key) const;

  trainer::TrainConfig train_config() const;
  dataio::SplitRatios split_ratios() const;
  std::vector<std::size_t> ks() const;

 private:
  void set(const std::string& key, nlohmann::json value);
  nlohmann::json values_;
};

/// Method whose loss weights the resolved switches reproduce, e.g. INVCF
/// with lambda1 = 0 reads as INVCF_I.
std::string equivalent_method(const trainer::TrainConfig& cfg);

}  // namespace invcf::cli
