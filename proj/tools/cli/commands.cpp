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

#include "cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <variant>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli/run_config.hpp"
#include "invcf/analysis/analysis.hpp"
#include "invcf/dataio/popularity.hpp"
#include "invcf/dataio/transforms.hpp"
#include "invcf/encoders/checkpoint.hpp"
#include "invcf/error.hpp"

namespace invcf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "invcf 0.1.0";

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const std::vector<Flag> kDataFlags{
    {"--data", "data.path", "raw interaction file"},
    {"--layout", "data.layout", "column letters: u=user i=item r=rating t=timestamp x=skip"},
    {"--binarize", "data.binarize", "keep ratings >= this (0 keeps all)"},
    {"--kcore", "data.kcore", "k-core threshold (0 or 1 disables)"},
    {"--split", "split.kind", "random | temporal | weekday | longtail"},
    {"--ratios", "split.ratios", "train,validation,test fractions"},
    {"--gammas", "split.gammas", "long-tail degrees, one test set each"},
    {"--test-fraction", "split.test_fraction", "share of interactions per long-tail test set"},
    {"--split-seed", "split.seed", "split seed"},
};

const std::vector<Flag> kTrainFlags{
    {"--splits", "run.splits", "prepared split directory"},
    {"--method", "train.method", "INVCF | INVCF_I | INVCF_D | ERM_SOFTMAX | ERM_BPR | IPS_CN"},
    {"--backbone", "train.backbone", "MF | LightGCN"},
    {"--layers", "train.layers", "LightGCN layers"},
    {"--dim", "train.dim", "embedding size"},
    {"--lr", "train.lr", "Adam learning rate"},
    {"--batch-size", "train.batch_size", "interactions per step"},
    {"--negatives", "train.negatives", "sampled negatives per positive (0 = in-batch)"},
    {"--epochs", "train.max_epochs", "epoch cap"},
    {"--patience", "train.patience", "epochs without validation gain before stopping"},
    {"--eval-k", "train.eval_k", "K for validation NDCG"},
    {"--seed", "train.seed", "initialization and sampling seed"},
    {"--pop-bucket-width", "train.pop_bucket_width", "count bucket width for popularity categories"},
    {"--precision", "train.precision", "float | double"},
    {"--tau", "loss.tau", "softmax temperature"},
    {"--alpha", "loss.alpha", "popularity risk weight"},
    {"--lambda1", "loss.lambda1", "augmentation weight"},
    {"--lambda2", "loss.lambda2", "disentanglement weight"},
    {"--discrepancy", "loss.discrepancy", "DCOR | MMD | L2"},
    {"--augmentation", "loss.augmentation",
     "RANDOM_PERMUTATION | HEAD_GROUP | TAIL_GROUP | DIFFERENT_GROUP"},
    {"--mmd-bandwidth", "loss.mmd_bandwidth", "RBF bandwidth (0 = median heuristic)"},
    {"--aug-draws", "loss.aug_draws", "augmentation draws per step"},
};

const std::vector<Flag> kEvalFlags{
    {"--checkpoint", "run.checkpoint", "model checkpoint"},
    {"--splits", "run.splits", "prepared split directory"},
    {"--tests", "run.tests", "test set names, e.g. g200,g10,g2 (default: test)"},
    {"--ks", "eval.ks", "cutoffs, e.g. 20,50"},
    {"--threads", "eval.threads", "worker cap (0 = INVCF_THREADS or all cores)"},
};

const std::vector<Flag> kPopFlags{
    {"--splits", "run.splits", "prepared split directory"},
    {"--tests", "run.tests", "test set names (default: test)"},
};

const std::vector<Flag> kExportFlags{
    {"--checkpoint", "run.checkpoint", "model checkpoint"},
    {"--splits", "run.splits", "prepared split directory"},
    {"--select", "export.select", "items:<ids> | users:<ids> | history:<user ids> | head-tail"},
};

const std::vector<Flag> kAngleFlags{
    {"--checkpoint", "run.checkpoint", "model checkpoint"},
    {"--splits", "run.splits", "prepared split directory (graph for LightGCN)"},
};

// ---- shared I/O ------------------------------------------------------------------------

struct Splits {
  std::shared_ptr<const dataio::IndexMap> users, items;
  dataio::InteractionDataset train, validation;
  std::vector<std::pair<std::string, dataio::InteractionDataset>> tests;
};

std::vector<std::string> test_names(const RunConfig& cfg) {
  std::vector<std::string> names;
  std::string_view rest = cfg.str("run.tests");
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    names.emplace_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (names.empty()) names.push_back("test");
  return names;
}

fs::path test_file(const fs::path& dir, const std::string& name) {
  return dir / (name == "test" ? std::string("test.txt") : "test_" + name + ".txt");
}

dataio::InteractionDataset strip(const dataio::InteractionDataset& d) {
  auto records = d.records();
  for (auto& r : records) {
    r.rating.reset();
    r.timestamp.reset();
  }
  return d.with_records(std::move(records));
}

void write_split(const fs::path& path, const dataio::InteractionDataset& d) {
  dataio::write_interactions(path, strip(d));
}

Splits load_splits(const RunConfig& cfg, const std::vector<std::string>& tests) {
  const fs::path dir = cfg.str("run.splits");
  if (dir.empty()) fail(ErrorCode::config, "--splits is required");
  Splits s;
  s.users = dataio::read_index_map(dir / "users.txt");
  s.items = dataio::read_index_map(dir / "items.txt");
  dataio::LoadOptions lo;
  lo.layout = dataio::ColumnLayout::parse("ui");
  lo.fixed_users = s.users;
  lo.fixed_items = s.items;
  auto load = [&](const fs::path& p) { return dataio::load_interactions(p, lo); };
  s.train = load(dir / "train.txt");
  s.validation = fs::exists(dir / "validation.txt") ? load(dir / "validation.txt")
                                                    : s.train.with_records({});
  for (const auto& name : tests) s.tests.emplace_back(name, load(test_file(dir, name)));
  return s;
}

using AnyParams = std::variant<encoders::ModelParams<float>, encoders::ModelParams<double>>;

struct Loaded {
  encoders::Checkpoint ckpt;
  std::string method;
  std::uint64_t seed = 0;
};

Loaded load_model(const RunConfig& cfg) {
  const fs::path p = cfg.str("run.checkpoint");
  if (p.empty()) fail(ErrorCode::config, "--checkpoint is required");
  Loaded l{encoders::load_checkpoint(p), "", 0};
  l.method = l.ckpt.metadata.value("method", std::string("UNKNOWN"));
  l.seed = l.ckpt.metadata.value("seed", std::uint64_t{0});
  return l;
}

void check_ids(const Loaded& l, const Splits& s) {
  if (l.ckpt.user_ids != s.users->ids() || l.ckpt.item_ids != s.items->ids()) {
    fail(ErrorCode::invalid_input, "checkpoint ids do not match the split directory");
  }
}

std::optional<encoders::InteractionGraph> graph_for(const AnyParams& params,
                                                    const dataio::InteractionDataset* train) {
  const bool needs = std::visit(
      [](const auto& p) { return p.backbone == encoders::Backbone::lightgcn && p.layers > 0; },
      params);
  if (!needs) return std::nullopt;
  if (!train) fail(ErrorCode::config, "LightGCN checkpoints need --splits for the graph");
  return encoders::InteractionGraph::build(*train);
}

class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg, fs::path out)
      : out_(std::move(out)), j_{{"command", std::move(command)}, {"config", cfg.values()},
                                 {"tool", kToolVersion}, {"outputs", json::array()}} {}

  fs::path add(const std::string& name) {
    j_["outputs"].push_back(name);
    return out_ / name;
  }
  json& extra() { return j_; }

  void write() {
    analysis::write_json(out_ / ("manifest_" + j_["command"].get<std::string>() + ".json"), j_);
  }

 private:
  fs::path out_;
  json j_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

// ---- subcommands -------------------------------------------------------------------------

dataio::InteractionDataset prepared_source(const RunConfig& cfg) {
  const fs::path path = cfg.str("data.path");
  if (path.empty()) fail(ErrorCode::config, "--data is required");
  dataio::LoadOptions lo;
  lo.layout = dataio::ColumnLayout::parse(cfg.str("data.layout"));
  auto d = dataio::load_interactions(path, lo);
  spdlog::info("loaded {} records ({} users, {} items)", d.size(), d.n_users(), d.n_items());
  const double threshold = cfg.num("data.binarize");
  d = threshold > 0 && d.has_ratings() ? dataio::binarize(d, threshold) : dataio::deduplicate(d);
  const auto k = cfg.uint("data.kcore");
  if (k > 1) d = dataio::k_core_filter(d, static_cast<std::uint32_t>(k));
  spdlog::info("after cleaning: {} interactions ({} users, {} items)", d.size(), d.n_users(),
               d.n_items());
  if (d.empty()) fail(ErrorCode::degenerate_split, "no interactions left after cleaning");
  return d;
}

void cmd_prepare(const RunConfig& cfg, const fs::path& out, const std::string& command) {
  const auto data = prepared_source(cfg);
  fs::create_directories(out);
  Manifest m(command, cfg, out);
  dataio::write_index_map(m.add("users.txt"), data.users());
  dataio::write_index_map(m.add("items.txt"), data.items());
  json sizes;
  const auto kind = cfg.str("split.kind");
  const auto seed = cfg.uint("split.seed");
  if (kind == "longtail") {
    const auto gammas = cfg.nums("split.gammas");
    const double val_share = cfg.split_ratios().validation;
    const double train_share = cfg.split_ratios().train / (cfg.split_ratios().train + val_share);
    const auto p = dataio::longtail_protocol(data, gammas, cfg.num("split.test_fraction"),
                                             train_share, seed);
    write_split(m.add("train.txt"), p.train);
    write_split(m.add("validation.txt"), p.validation);
    sizes["train"] = p.train.size();
    sizes["validation"] = p.validation.size();
    for (std::size_t k = 0; k < gammas.size(); ++k) {
      const auto name = dataio::gamma_name(gammas[k]);
      write_split(m.add("test_" + name + ".txt"), p.tests[k]);
      sizes[name] = p.tests[k].size();
      sizes["kl_" + name] = dataio::popularity_kl(dataio::popularity_counts(p.train),
                                                  dataio::popularity_counts(p.tests[k]));
    }
  } else {
    dataio::SplitBundle b;
    if (kind == "random") {
      b = dataio::random_split(data, cfg.split_ratios(), seed);
    } else if (kind == "temporal" || kind == "weekday") {
      b = dataio::temporal_split(data, cfg.split_ratios(),
                                 kind == "temporal" ? dataio::TemporalMode::by_timestamp
                                                    : dataio::TemporalMode::by_weekday);
    } else {
      fail(ErrorCode::config, "split.kind must be random, temporal, weekday or longtail");
    }
    write_split(m.add("train.txt"), b.train);
    write_split(m.add("validation.txt"), b.validation);
    write_split(m.add("test.txt"), b.test);
    sizes = {{"train", b.train.size()}, {"validation", b.validation.size()}, {"test", b.test.size()}};
    sizes["kl_test"] = dataio::popularity_kl(dataio::popularity_counts(b.train),
                                             dataio::popularity_counts(b.test));
  }
  m.extra()["sizes"] = sizes;
  m.write();
}

template <typename Real>
void train_as(const RunConfig& cfg, const trainer::TrainConfig& tc, const Splits& s,
              Manifest& m) {
  const dataio::SplitBundle bundle{s.train, s.validation, s.train.with_records({})};
  const auto result = trainer::fit<Real>(bundle, tc);
  encoders::Checkpoint ck{result.params, s.users->ids(), s.items->ids(),
                          {{"method", trainer::to_string(tc.method)},
                           {"seed", tc.seed},
                           {"best_epoch", result.history.best_epoch},
                           {"config", cfg.values()}}};
  encoders::save_checkpoint(m.add("model.ckpt"), ck);
  write_text(m.add("history.jsonl"), result.history.to_json_lines());
  m.extra()["best_epoch"] = result.history.best_epoch;
  m.extra()["epochs_run"] = result.history.epochs.size();
  m.extra()["stop_reason"] = result.history.stop_reason;
}

void cmd_train(const RunConfig& cfg, const fs::path& out) {
  const auto tc = cfg.train_config();
  const auto s = load_splits(cfg, {});
  fs::create_directories(out);
  Manifest m("train", cfg, out);
  const auto eff = tc.effective_loss();
  m.extra()["effective"] = {{"method", trainer::to_string(tc.method)},
                            {"equivalent_method", equivalent_method(tc)},
                            {"alpha", eff.alpha},
                            {"lambda1", eff.lambda1},
                            {"lambda2", eff.lambda2},
                            {"risk", tc.risk() == losses::Risk::bpr ? "BPR" : "SOFTMAX"}};
  spdlog::info("training {} ({}) on {} interactions", trainer::to_string(tc.method),
               equivalent_method(tc), s.train.size());
  if (cfg.str("train.precision") == "double") {
    train_as<double>(cfg, tc, s, m);
  } else {
    train_as<float>(cfg, tc, s, m);
  }
  m.write();
}

void cmd_evaluate(const RunConfig& cfg, const fs::path& out) {
  const auto names = test_names(cfg);
  const auto s = load_splits(cfg, names);
  const auto model = load_model(cfg);
  check_ids(model, s);
  const auto graph = graph_for(model.ckpt.params, &s.train);
  eval::EvalOptions opt;
  opt.ks = cfg.ks();
  opt.threads = static_cast<unsigned>(cfg.uint("eval.threads"));
  fs::create_directories(out);
  Manifest m("evaluate", cfg, out);
  for (const auto& [name, test] : s.tests) {
    const auto results = std::visit(
        [&](const auto& p) {
          return eval::evaluate(p, graph ? &*graph : nullptr, test, s.train, opt);
        },
        model.ckpt.params);
    json j{{"test", name}, {"method", model.method}, {"seed", model.seed},
           {"results", json::array()}};
    for (const auto& r : results) {
      j["results"].push_back(r.to_json());
      spdlog::info("{} {}@{}: hr {:.5f} recall {:.5f} ndcg {:.5f}", name, model.method, r.k,
                   r.hr, r.recall, r.ndcg);
    }
    analysis::write_json(m.add("eval_" + name + ".json"), j);
  }
  m.write();
}

void cmd_pop_stats(const RunConfig& cfg, const fs::path& out) {
  const auto s = load_splits(cfg, test_names(cfg));
  fs::create_directories(out);
  Manifest m("pop-stats", cfg, out);
  for (const auto& [name, test] : s.tests) {
    auto report = analysis::export_popularity_report({s.train, s.validation, test});
    report["test"] = name;
    analysis::write_json(m.add("popstats_" + name + ".json"), report);
  }
  m.write();
}

void cmd_export_viz(const RunConfig& cfg, const fs::path& out) {
  const auto s = load_splits(cfg, {});
  const auto model = load_model(cfg);
  check_ids(model, s);
  const auto graph = graph_for(model.ckpt.params, &s.train);
  const auto sel = analysis::Selection::parse(cfg.str("export.select"));
  const analysis::ExportMeta meta{model.method, model.seed, {{"select", cfg.str("export.select")}}};
  const auto e = std::visit(
      [&](const auto& p) {
        return analysis::export_embeddings(p, graph ? &*graph : nullptr, s.train, sel, meta);
      },
      model.ckpt.params);
  fs::create_directories(out);
  Manifest m("export-viz", cfg, out);
  analysis::write_json(m.add(analysis::export_filename("sphere", model.method, model.seed)),
                       e.to_json());
  m.write();
}

void cmd_angles(const RunConfig& cfg, const fs::path& out) {
  const auto model = load_model(cfg);
  std::optional<Splits> s;
  if (!cfg.str("run.splits").empty()) {
    s = load_splits(cfg, {});
    check_ids(model, *s);
  }
  const auto graph = graph_for(model.ckpt.params, s ? &s->train : nullptr);
  const auto r = std::visit(
      [&](const auto& p) { return analysis::angle_distribution(p, graph ? &*graph : nullptr); },
      model.ckpt.params);
  fs::create_directories(out);
  Manifest m("angles", cfg, out);
  analysis::write_json(m.add(analysis::export_filename("angles", model.method, model.seed)),
                       r.to_json({model.method, model.seed, {}}));
  spdlog::info("angles: mean {:.3f} std {:.3f} over {} items ({} flagged)", r.mean, r.stddev,
               r.n_scored(), r.flagged.size());
  m.write();
}

// ---- wiring ------------------------------------------------------------------------------

struct Sub {
  CLI::App* app = nullptr;
  std::string config_file;
  std::string out;
  std::vector<std::string> sets;
  bool verbose = false;
  std::map<std::string, std::string> flag_values;  // key -> text
  std::vector<Flag> flags;
};

Sub& add_sub(CLI::App& root, std::vector<std::unique_ptr<Sub>>& subs, const std::string& name,
             const std::string& help, std::vector<std::vector<Flag>> groups) {
  auto sub = std::make_unique<Sub>();
  sub->app = root.add_subcommand(name, help);
  sub->app->add_option("--config", sub->config_file, "JSON config or run manifest to start from");
  sub->app->add_option("--out", sub->out, "output directory")->required();
  sub->app->add_option("--set", sub->sets, "override any config key: key=value");
  sub->app->add_flag("-v,--verbose", sub->verbose, "debug logging");
  for (const auto& g : groups) {
    for (const auto& f : g) {
      if (std::any_of(sub->flags.begin(), sub->flags.end(),
                      [&](const Flag& x) { return std::string(x.name) == f.name; })) {
        continue;
      }
      sub->flags.push_back(f);
      sub->app->add_option(f.name, sub->flag_values[f.key], f.help);
    }
  }
  subs.push_back(std::move(sub));
  return *subs.back();
}

RunConfig resolve(const Sub& sub) {
  RunConfig cfg;
  if (!sub.config_file.empty()) cfg.merge_file(sub.config_file);
  for (const auto& f : sub.flags) {
    if (sub.app->count(f.name) > 0) cfg.set_from_string(f.key, sub.flag_values.at(f.key));
  }
  for (const auto& kv : sub.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::config, "--set expects key=value, got '" + kv + "'");
    cfg.set_from_string(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App root{"InvCF collaborative-filtering lab"};
  root.require_subcommand(1);
  root.set_version_flag("--version", kToolVersion);
  std::vector<std::unique_ptr<Sub>> subs;
  add_sub(root, subs, "prepare-data", "clean a raw interaction file and write splits", {kDataFlags});
  add_sub(root, subs, "make-longtail", "prepare long-tail test sets (one per gamma)", {kDataFlags});
  add_sub(root, subs, "train", "fit a model and write a checkpoint with its history", {kTrainFlags});
  add_sub(root, subs, "evaluate", "all-ranking HR/Recall/NDCG on one or more test sets", {kEvalFlags});
  add_sub(root, subs, "pop-stats", "subgroup histograms and popularity KL", {kPopFlags});
  add_sub(root, subs, "export-viz", "unit-sphere embedding export", {kExportFlags});
  add_sub(root, subs, "angles", "preference/popularity angle distribution", {kAngleFlags});

  try {
    root.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return root.exit(e);
  } catch (const CLI::ParseError& e) {
    root.exit(e);
    return 2;
  }

  auto logger = spdlog::get("invcf");
  if (!logger) logger = spdlog::stderr_color_mt("invcf");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  for (const auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    spdlog::set_level(sub->verbose ? spdlog::level::debug : spdlog::level::info);
    const std::string name = sub->app->get_name();
    try {
      auto cfg = resolve(*sub);
      const fs::path out = sub->out;
      if (name == "prepare-data") {
        cmd_prepare(cfg, out, name);
      } else if (name == "make-longtail") {
        cfg.set_from_string("split.kind", "longtail");
        cmd_prepare(cfg, out, name);
      } else if (name == "train") {
        cmd_train(cfg, out);
      } else if (name == "evaluate") {
        cmd_evaluate(cfg, out);
      } else if (name == "pop-stats") {
        cmd_pop_stats(cfg, out);
      } else if (name == "export-viz") {
        cmd_export_viz(cfg, out);
      } else if (name == "angles") {
        cmd_angles(cfg, out);
      }
    } catch (const Error& e) {
      spdlog::error("{}: {} error: {}", name, to_string(e.code()), e.what());
      return 1;
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", name, e.what());
      return 1;
    }
    return 0;
  }
  return 2;
}

}  // namespace invcf::cli
