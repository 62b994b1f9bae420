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
#include <optional>
#include <string_view>

namespace invcf::losses {

enum class Discrepancy { dcor, mmd, l2 };
enum class Augmentation { random_permutation, head_group, tail_group, different_group };

const char* to_string(Discrepancy kind) noexcept;
const char* to_string(Augmentation kind) noexcept;
Discrepancy parse_discrepancy(std::string_view name);
Augmentation parse_augmentation(std::string_view name);

struct LossConfig {
  double tau = 0.15;
  double alpha = 1e-4;
  double lambda1 = 1e-5;
  double lambda2 = 1e-3;
  Discrepancy discrepancy = Discrepancy::dcor;
  Augmentation augmentation = Augmentation::random_permutation;
  // Empty means the median heuristic.
  std::optional<double> mmd_bandwidth;
  // Bank draws averaged per step for the augmentation term.
  std::uint32_t aug_draws = 1;

  void validate() const;
};

}  // namespace invcf::losses
