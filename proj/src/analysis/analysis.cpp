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

#include "invcf/analysis/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>

#include "invcf/dataio/popularity.hpp"
#include "invcf/error.hpp"

namespace invcf::analysis {

namespace {

constexpr std::size_t kBins = 180;

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

template <typename Real>
std::vector<double> row_of(const Matrix<Real>& m, std::size_t r) {
  const auto row = m.row(r);
  return {row.begin(), row.end()};
}

// Unit-normalizes in place; returns false (vector untouched) for zero norm.
bool normalize(std::vector<double>& v) {
  const double n = norm(v);
  if (n == 0) return false;
  for (auto& x : v) x /= n;
  return true;
}

nlohmann::json record_json(const EmbeddingRecord& r) {
  nlohmann::json j{{"kind", to_string(r.kind)}, {"index", r.index},         {"id", r.id},
                   {"popularity", r.popularity}, {"pref", r.pref},          {"pop", r.pop},
                   {"pref_zero", r.pref_zero},   {"pop_zero", r.pop_zero}};
  if (!r.owner.empty()) j["owner"] = r.owner;
  return j;
}

EmbeddingRecord record_from_json(const nlohmann::json& j) {
  EmbeddingRecord r;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "user") {
    r.kind = EntityKind::user;
  } else if (kind == "item") {
    r.kind = EntityKind::item;
  } else {
    fail(ErrorCode::format, "unknown entity kind '" + kind + "'");
  }
  r.index = j.at("index").get<Index>();
  r.id = j.at("id").get<std::string>();
  r.popularity = j.at("popularity").get<std::uint64_t>();
  r.pref = j.at("pref").get<std::vector<double>>();
  r.pop = j.at("pop").get<std::vector<double>>();
  r.pref_zero = j.at("pref_zero").get<bool>();
  r.pop_zero = j.at("pop_zero").get<bool>();
  r.owner = j.value("owner", std::string{});
  return r;
}

nlohmann::json histogram_json(const dataio::SubgroupHistogram& h) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& row : h.cells) cells.push_back(row);
  return {{"cells", cells}, {"total", h.total}};
}

}  // namespace

std::optional<double> angle_degrees(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0 || nb == 0) return std::nullopt;
  double dot = 0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  const double c = std::clamp(dot / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

AngleReport summarize_angles(std::vector<std::optional<double>> angles) {
  AngleReport r;
  r.angles = std::move(angles);
  r.histogram.assign(kBins, 0);
  double sum = 0;
  for (std::size_t i = 0; i < r.angles.size(); ++i) {
    if (!r.angles[i]) {
      r.flagged.push_back(static_cast<Index>(i));
      continue;
    }
    const double a = *r.angles[i];
    if (!(a >= 0 && a <= 180)) fail(ErrorCode::numeric, "angle outside [0, 180]");
    sum += a;
    ++r.histogram[std::min(kBins - 1, static_cast<std::size_t>(a))];
  }
  const std::size_t n = r.n_scored();
  if (n == 0) return r;
  r.mean = sum / double(n);
  double ss = 0;
  for (const auto& a : r.angles) {
    if (a) ss += (*a - r.mean) * (*a - r.mean);
  }
  r.stddev = std::sqrt(ss / double(n));
  return r;
}

nlohmann::json AngleReport::to_json(const ExportMeta& meta) const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : angles) a.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
  return {{"method", meta.method}, {"seed", meta.seed},       {"meta", meta.extra},
          {"angles_deg", a},       {"flagged", flagged},      {"mean", mean},
          {"std", stddev},         {"bin_width_deg", 1},      {"histogram", histogram}};
}

AngleReport AngleReport::from_json(const nlohmann::json& j) {
  std::vector<std::optional<double>> angles;
  for (const auto& x : j.at("angles_deg")) {
    angles.push_back(x.is_null() ? std::nullopt : std::optional(x.get<double>()));
  }
  return summarize_angles(std::move(angles));
}

template <typename Real>
AngleReport angle_distribution(const encoders::ModelParams<Real>& params,
                               const encoders::InteractionGraph* graph) {
  const auto all = encoders::encode_all(params, graph);
  std::vector<std::optional<double>> angles(params.n_items());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    angles[i] = angle_degrees(row_of(all.item_pref, i), row_of(all.item_pop, i));
  }
  return summarize_angles(std::move(angles));
}

const char* to_string(EntityKind kind) noexcept {
  return kind == EntityKind::user ? "user" : "item";
}

nlohmann::json EmbeddingExport::to_json() const {
  nlohmann::json f = nlohmann::json::array(), r = nlohmann::json::array();
  for (const auto& x : focal) f.push_back(record_json(x));
  for (const auto& x : records) r.push_back(record_json(x));
  return {{"dim", dim},
          {"backbone", backbone},
          {"method", meta.method},
          {"seed", meta.seed},
          {"meta", meta.extra},
          {"focal", f},
          {"records", r}};
}

EmbeddingExport EmbeddingExport::from_json(const nlohmann::json& j) {
  EmbeddingExport e;
  e.dim = j.at("dim").get<std::size_t>();
  e.backbone = j.at("backbone").get<std::string>();
  e.meta.method = j.at("method").get<std::string>();
  e.meta.seed = j.at("seed").get<std::uint64_t>();
  e.meta.extra = j.value("meta", nlohmann::json::object());
  for (const auto& x : j.at("focal")) e.focal.push_back(record_from_json(x));
  for (const auto& x : j.at("records")) e.records.push_back(record_from_json(x));
  return e;
}

Selection Selection::parse(std::string_view text) {
  Selection s;
  const auto colon = text.find(':');
  std::string kind(text.substr(0, colon));
  for (auto& c : kind) c = c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (kind == "items") {
    s.kind = Kind::items;
  } else if (kind == "users") {
    s.kind = Kind::users;
  } else if (kind == "history") {
    s.kind = Kind::user_history;
  } else if (kind == "head-tail") {
    s.kind = Kind::head_tail;
    return s;
  } else {
    fail(ErrorCode::config, "unknown selection '" + std::string(text) +
                                "' (expected items:<ids>, users:<ids>, history:<ids> or head-tail)");
  }
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    fail(ErrorCode::config, "selection '" + std::string(text) + "' needs a comma-separated id list");
  }
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    s.ids.emplace_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return s;
}

template <typename Real>
EmbeddingExport export_embeddings(const encoders::ModelParams<Real>& params,
                                  const encoders::InteractionGraph* graph,
                                  const dataio::InteractionDataset& train,
                                  const Selection& selection, const ExportMeta& meta) {
  if (train.n_users() != params.n_users() || train.n_items() != params.n_items()) {
    fail(ErrorCode::invalid_input, "export_embeddings: dataset and model sizes differ");
  }
  const auto all = encoders::encode_all(params, graph);
  const auto stats = dataio::popularity_counts(train);
  auto make = [&](EntityKind kind, Index index, const std::string& owner) {
    EmbeddingRecord r;
    r.kind = kind;
    r.index = index;
    r.owner = owner;
    if (kind == EntityKind::user) {
      r.id = train.users().id(index);
      r.popularity = stats.user_counts[index];
      r.pref = row_of(all.user_pref, index);
      r.pop = row_of(all.user_pop, index);
    } else {
      r.id = train.items().id(index);
      r.popularity = stats.item_counts[index];
      r.pref = row_of(all.item_pref, index);
      r.pop = row_of(all.item_pop, index);
    }
    r.pref_zero = !normalize(r.pref);
    r.pop_zero = !normalize(r.pop);
    return r;
  };
  auto user_index = [&](const std::string& id) {
    const auto u = train.users().find(id);
    if (!u) fail(ErrorCode::index, "unknown user '" + id + "'");
    return *u;
  };
  const auto by_user = train.items_by_user();
  auto add_history = [&](EmbeddingExport& out, Index u) {
    out.focal.push_back(make(EntityKind::user, u, ""));
    auto items = by_user[u];
    items.erase(std::unique(items.begin(), items.end()), items.end());
    for (auto i : items) out.records.push_back(make(EntityKind::item, i, train.users().id(u)));
  };

  EmbeddingExport out;
  out.dim = params.dim;
  out.backbone = encoders::to_string(params.backbone);
  out.meta = meta;
  switch (selection.kind) {
    case Selection::Kind::items:
      for (const auto& id : selection.ids) {
        const auto i = train.items().find(id);
        if (!i) fail(ErrorCode::index, "unknown item '" + id + "'");
        out.records.push_back(make(EntityKind::item, *i, ""));
      }
      break;
    case Selection::Kind::users:
      for (const auto& id : selection.ids) out.records.push_back(make(EntityKind::user, user_index(id), ""));
      break;
    case Selection::Kind::user_history:
      for (const auto& id : selection.ids) add_history(out, user_index(id));
      break;
    case Selection::Kind::head_tail: {
      const auto groups = dataio::third_partition(stats.user_counts);
      for (auto g : {dataio::PopularityGroup::head, dataio::PopularityGroup::tail}) {
        std::optional<Index> pick;
        for (Index u = 0; u < groups.size(); ++u) {
          if (groups[u] != g) continue;
          if (!pick || stats.user_counts[u] > stats.user_counts[*pick]) pick = u;
        }
        if (!pick) fail(ErrorCode::invalid_input, std::string("no user in the ") + dataio::to_string(g) + " group");
        add_history(out, *pick);
      }
      break;
    }
  }
  return out;
}

nlohmann::json export_popularity_report(const dataio::SplitBundle& splits) {
  const auto report = dataio::subgroup_histogram(splits.train, splits.test);
  nlohmann::json ug = nlohmann::json::array(), ig = nlohmann::json::array();
  for (auto g : report.user_groups) ug.push_back(dataio::to_string(g));
  for (auto g : report.item_groups) ig.push_back(dataio::to_string(g));
  return {{"groups", {"head", "mid", "tail"}},
          {"train", histogram_json(report.train)},
          {"test", histogram_json(report.test)},
          {"kl", dataio::popularity_kl(dataio::popularity_counts(splits.train),
                                       dataio::popularity_counts(splits.test))},
          {"user_groups", ug},
          {"item_groups", ig}};
}

std::string export_filename(std::string_view kind, std::string_view method, std::uint64_t seed) {
  std::string m(method);
  for (auto& c : m) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::string(kind) + "_" + m + "_seed" + std::to_string(seed) + ".json";
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, path.string() + ": " + e.what());
  }
}

template AngleReport angle_distribution(const encoders::ModelParams<float>&,
                                        const encoders::InteractionGraph*);
template AngleReport angle_distribution(const encoders::ModelParams<double>&,
                                        const encoders::InteractionGraph*);
template EmbeddingExport export_embeddings(const encoders::ModelParams<float>&,
                                           const encoders::InteractionGraph*,
                                           const dataio::InteractionDataset&, const Selection&,
                                           const ExportMeta&);
template EmbeddingExport export_embeddings(const encoders::ModelParams<double>&,
                                           const encoders::InteractionGraph*,
                                           const dataio::InteractionDataset&, const Selection&,
                                           const ExportMeta&);

}  // namespace invcf::analysis
