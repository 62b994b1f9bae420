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

#include "invcf/losses/config.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "invcf/error.hpp"

namespace invcf::losses {

const char* to_string(Discrepancy kind) noexcept {
  switch (kind) {
    case Discrepancy::dcor: return "DCOR";
    case Discrepancy::mmd: return "MMD";
    case Discrepancy::l2: return "L2";
  }
  return "?";
}

const char* to_string(Augmentation kind) noexcept {
  switch (kind) {
    case Augmentation::random_permutation: return "RANDOM_PERMUTATION";
    case Augmentation::head_group: return "HEAD_GROUP";
    case Augmentation::tail_group: return "TAIL_GROUP";
    case Augmentation::different_group: return "DIFFERENT_GROUP";
  }
  return "?";
}

namespace {
std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}
}  // namespace

Discrepancy parse_discrepancy(std::string_view name) {
  const auto n = upper(name);
  for (auto k : {Discrepancy::dcor, Discrepancy::mmd, Discrepancy::l2}) {
    if (n == to_string(k)) return k;
  }
  fail(ErrorCode::config, "unknown discrepancy '" + std::string(name) + "'");
}

Augmentation parse_augmentation(std::string_view name) {
  const auto n = upper(name);
  for (auto k : {Augmentation::random_permutation, Augmentation::head_group,
                 Augmentation::tail_group, Augmentation::different_group}) {
    if (n == to_string(k)) return k;
  }
  fail(ErrorCode::config, "unknown augmentation '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  if (!(tau > 0) || !std::isfinite(tau)) fail(ErrorCode::config, "tau must be > 0");
  for (double w : {alpha, lambda1, lambda2}) {
    if (!(w >= 0) || !std::isfinite(w)) fail(ErrorCode::config, "loss weights must be finite and >= 0");
  }
  if (mmd_bandwidth && !(*mmd_bandwidth > 0)) fail(ErrorCode::config, "mmd bandwidth must be > 0");
  if (aug_draws == 0) fail(ErrorCode::config, "aug_draws must be >= 1");
}

}  // namespace invcf::losses
