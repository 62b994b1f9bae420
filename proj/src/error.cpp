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

#include "invcf/error.hpp"

namespace invcf {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io:
      return "io";
    case ErrorCode::parse:
      return "parse";
    case ErrorCode::invalid_input:
      return "invalid-input";
    case ErrorCode::config:
      return "config";
    case ErrorCode::degenerate_split:
      return "degenerate-split";
    case ErrorCode::infeasible_spec:
      return "infeasible-spec";
    case ErrorCode::index:
      return "index";
    case ErrorCode::numeric:
      return "numeric";
    case ErrorCode::degenerate_user:
      return "degenerate-user";
    case ErrorCode::empty_evaluation:
      return "empty-evaluation";
    case ErrorCode::format:
      return "format";
  }
  return "unknown";
}

}  // namespace invcf
