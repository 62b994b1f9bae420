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

#include "cli/run_config.hpp"

#include <charconv>

#include "invcf/analysis/analysis.hpp"
#include "invcf/error.hpp"

namespace invcf::cli {

namespace {

bool is_number(const nlohmann::json& j) { return j.is_number(); }

bool same_kind(const nlohmann::json& def, const nlohmann::json& v) {
  if (def.is_number_unsigned() || def.is_number_integer()) return v.is_number_unsigned() ||
                                                                   (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (def.is_number()) return is_number(v);
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) return v.is_array() && std::all_of(v.begin(), v.end(), is_number);
  return false;
}

double parse_double(const std::string& key, std::string_view s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    fail(ErrorCode::config, key + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

}  // namespace

const nlohmann::json& RunConfig::defaults() {
  static const nlohmann::json d = [] {
    const trainer::TrainConfig t;
    nlohmann::json j;
    j["data.path"] = "";
    j["data.layout"] = "uirt";
    j["data.binarize"] = 4.0;  // 0 keeps every record
    j["data.kcore"] = 10u;
    j["split.kind"] = "random";
    j["split.ratios"] = {0.6, 0.1, 0.3};
    j["split.gammas"] = {200.0, 10.0, 2.0};
    j["split.test_fraction"] = 0.1;
    j["split.seed"] = 0u;
    j["train.method"] = trainer::to_string(t.method);
    j["train.backbone"] = encoders::to_string(t.backbone);
    j["train.layers"] = t.layers;
    j["train.dim"] = t.dim;
    j["train.lr"] = t.learning_rate;
    j["train.batch_size"] = t.batch_size;
    j["train.negatives"] = t.n_negatives;
    j["train.max_epochs"] = t.max_epochs;
    j["train.patience"] = t.patience;
    j["train.eval_k"] = t.eval_k;
    j["train.seed"] = t.seed;
    j["train.pop_bucket_width"] = t.pop_bucket_width;
    j["train.precision"] = "float";
    j["loss.tau"] = t.loss.tau;
    j["loss.alpha"] = t.loss.alpha;
    j["loss.lambda1"] = t.loss.lambda1;
    j["loss.lambda2"] = t.loss.lambda2;
    j["loss.discrepancy"] = losses::to_string(t.loss.discrepancy);
    j["loss.augmentation"] = losses::to_string(t.loss.augmentation);
    j["loss.mmd_bandwidth"] = 0.0;  // 0 = median heuristic
    j["loss.aug_draws"] = t.loss.aug_draws;
    j["run.splits"] = "";
    j["run.checkpoint"] = "";
    j["run.tests"] = "";
    j["export.select"] = "head-tail";
    j["eval.ks"] = {20u};
    j["eval.threads"] = 0u;
    return j;
  }();
  return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, nlohmann::json value) {
  const auto& d = defaults();
  if (!d.contains(key)) fail(ErrorCode::config, "unknown config key '" + key + "'");
  if (!same_kind(d.at(key), value)) {
    fail(ErrorCode::config, "config key '" + key + "' expects " + std::string(d.at(key).type_name()) +
                                ", got " + value.dump());
  }
  values_[key] = std::move(value);
}

void RunConfig::merge(const nlohmann::json& flat) {
  if (!flat.is_object()) fail(ErrorCode::config, "config must be a JSON object of dotted keys");
  for (const auto& [k, v] : flat.items()) set(k, v);
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  const auto j = analysis::read_json(path);
  merge(j.contains("config") && j.contains("command") ? j.at("config") : j);
}

void RunConfig::set_from_string(const std::string& key, const std::string& text) {
  const auto& d = defaults();
  if (!d.contains(key)) fail(ErrorCode::config, "unknown config key '" + key + "'");
  const auto& def = d.at(key);
  if (def.is_string()) {
    set(key, text);
  } else if (def.is_array()) {
    nlohmann::json arr = nlohmann::json::array();
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const double v = parse_double(key, rest.substr(0, comma));
      if (def.front().is_number_unsigned()) {
        if (v < 0 || v != std::floor(v)) fail(ErrorCode::config, key + ": expects non-negative integers");
        arr.push_back(static_cast<std::uint64_t>(v));
      } else {
        arr.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    set(key, arr);
  } else if (def.is_number_unsigned()) {
    const double v = parse_double(key, text);
    if (v < 0 || v != std::floor(v)) fail(ErrorCode::config, key + ": expects a non-negative integer");
    set(key, static_cast<std::uint64_t>(v));
  } else {
    set(key, parse_double(key, text));
  }
}

const nlohmann::json& RunConfig::at(const std::string& key) const { return values_.at(key); }
std::string RunConfig::str(const std::string& key) const { return at(key).get<std::string>(); }
double RunConfig::num(const std::string& key) const { return at(key).get<double>(); }
std::uint64_t RunConfig::uint(const std::string& key) const { return at(key).get<std::uint64_t>(); }
std::vector<double> RunConfig::nums(const std::string& key) const {
  return at(key).get<std::vector<double>>();
}

trainer::TrainConfig RunConfig::train_config() const {
  trainer::TrainConfig t;
  t.method = trainer::parse_method(str("train.method"));
  t.backbone = encoders::parse_backbone(str("train.backbone"));
  t.layers = static_cast<std::uint32_t>(uint("train.layers"));
  t.dim = uint("train.dim");
  t.learning_rate = num("train.lr");
  t.batch_size = uint("train.batch_size");
  t.n_negatives = uint("train.negatives");
  t.max_epochs = static_cast<std::uint32_t>(uint("train.max_epochs"));
  t.patience = static_cast<std::uint32_t>(uint("train.patience"));
  t.eval_k = uint("train.eval_k");
  t.seed = uint("train.seed");
  t.pop_bucket_width = uint("train.pop_bucket_width");
  t.loss.tau = num("loss.tau");
  t.loss.alpha = num("loss.alpha");
  t.loss.lambda1 = num("loss.lambda1");
  t.loss.lambda2 = num("loss.lambda2");
  t.loss.discrepancy = losses::parse_discrepancy(str("loss.discrepancy"));
  t.loss.augmentation = losses::parse_augmentation(str("loss.augmentation"));
  if (num("loss.mmd_bandwidth") > 0) t.loss.mmd_bandwidth = num("loss.mmd_bandwidth");
  t.loss.aug_draws = static_cast<std::uint32_t>(uint("loss.aug_draws"));
  const auto p = str("train.precision");
  if (p != "float" && p != "double") fail(ErrorCode::config, "train.precision must be float or double");
  t.validate();
  return t;
}

dataio::SplitRatios RunConfig::split_ratios() const {
  const auto r = nums("split.ratios");
  if (r.size() != 3) fail(ErrorCode::config, "split.ratios needs three values");
  dataio::SplitRatios s{r[0], r[1], r[2]};
  s.validate();
  return s;
}

std::vector<std::size_t> RunConfig::ks() const {
  auto ks = at("eval.ks").get<std::vector<std::size_t>>();
  if (ks.empty() || std::find(ks.begin(), ks.end(), 0u) != ks.end()) {
    fail(ErrorCode::config, "eval.ks must be a nonempty list of positive integers");
  }
  return ks;
}

std::string equivalent_method(const trainer::TrainConfig& cfg) {
  using trainer::Method;
  if (cfg.method != Method::invcf) return trainer::to_string(cfg.method);
  const auto& l = cfg.loss;
  if (l.alpha == 0 && l.lambda1 == 0 && l.lambda2 == 0) return trainer::to_string(Method::erm_softmax);
  if (l.lambda1 == 0 && l.lambda2 != 0) return trainer::to_string(Method::invcf_i);
  if (l.lambda2 == 0 && l.lambda1 != 0) return trainer::to_string(Method::invcf_d);
  return trainer::to_string(Method::invcf);
}

}  // namespace invcf::cli
