// Copyright 2026 The fairsde Authors
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

// Command-line front end: full experiments plus thin wrappers around the
// individual pipeline stages. Exit codes: 0 ok, 1 usage, 2 data/IO, 3 divergence.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fairsde/checkpoint.hpp"
#include "fairsde/experiment.hpp"

namespace {

using namespace fairsde;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct DataArgs {
  std::string config;
  std::string csv;
  int classes = 0;
  int groups = 0;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("-c,--config", args.config, "Experiment config file");
  cmd->add_option("--data", args.csv, "CSV dataset (overrides the config data source)");
  cmd->add_option("--classes", args.classes, "Number of classes in --data (0 = infer)");
  cmd->add_option("--groups", args.groups, "Number of groups in --data (0 = infer)");
}

ExperimentConfig resolve_config(const DataArgs& args) {
  ExperimentConfig cfg = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
  if (!args.csv.empty()) {
    cfg.data.kind = DataSource::Kind::kCsv;
    cfg.data.csv_path = args.csv;
    cfg.data.schema.num_classes = args.classes;
    cfg.data.schema.num_groups = args.groups;
  }
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write '" + out_path + "'");
  out << text;
}

int cmd_run(const DataArgs& data, const std::string& out_dir,
            const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig cfg = resolve_config(data);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (!seeds.empty()) cfg.seeds = seeds;
  cfg.validate();
  const Dataset dataset = load_dataset(cfg);
  ExperimentBundle bundle;
  for (std::uint64_t seed : cfg.seeds) {
    std::cerr << "seed " << seed << ": training\n";
    bundle.seeds.push_back(run_seed(dataset, cfg, seed));
    const auto& r = bundle.seeds.back();
    std::cerr << "seed " << seed << ": erm val mf " << r.erm_reports.val.mf << ", gap "
              << r.erm_reports.val.gap << "\n";
  }
  write_bundle(bundle, cfg, dataset, cfg.output_dir);
  std::cerr << "wrote " << bundle.seeds.size() << " report(s) to " << cfg.output_dir.string()
            << "\n";
  return kExitOk;
}

int cmd_gen_data(const DataArgs& data, const std::string& out, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> n_train) {
  ExperimentConfig cfg = resolve_config(data);
  if (cfg.data.kind != DataSource::Kind::kSynthetic) {
    throw ConfigError("gen-data needs a synthetic data source");
  }
  if (seed) cfg.data.seed = *seed;
  if (n_train) cfg.data.preset_n_train = *n_train;
  const Dataset dataset = generate_synthetic(resolve_synthetic(cfg.data));
  std::ostringstream ss;
  write_csv(dataset, ss);
  emit(ss.str(), out);
  return kExitOk;
}

int cmd_train(const DataArgs& data, std::uint64_t seed, const std::string& out_dir) {
  ExperimentConfig cfg = resolve_config(data);
  cfg.validate();
  HyperParams hp = cfg.hp;
  hp.seed = seed;
  const Dataset dataset = load_dataset(cfg);
  const auto lineage = SeedLineage::from(seed);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const ErmModel erm = train_erm(dataset, hp);
  save_checkpoint(dir / "erm.json", erm, lineage);
  const DecoupledModel decoupled = train_decoupled_baseline(erm, dataset, hp);
  save_checkpoint(dir / "decoupled.json", decoupled, lineage);
  const FairSdeModel fairsde = train_fairsde(dataset, hp);
  save_checkpoint(dir / "fairsde.json", fairsde, lineage);

  std::ofstream log(dir / "training_log.csv");
  if (!log) throw DataError("cannot write training log in '" + out_dir + "'");
  write_training_log_csv(fairsde.log, log);
  std::cerr << "wrote erm.json, decoupled.json, fairsde.json, training_log.csv to " << out_dir
            << "\n";
  return kExitOk;
}

Scorer scorer_for(const std::string& checkpoint, const std::string& erm_checkpoint) {
  const std::string kind = checkpoint_model(checkpoint);
  if (kind == "erm") return erm_scorer(load_erm_checkpoint(checkpoint));
  if (kind == "fairsde") return expert_scorer(load_fairsde_checkpoint(checkpoint));
  if (kind == "decoupled") {
    if (erm_checkpoint.empty()) {
      throw CheckpointError("a decoupled checkpoint needs --erm-checkpoint for its backbone");
    }
    return decoupled_scorer(load_erm_checkpoint(erm_checkpoint),
                            load_decoupled_checkpoint(checkpoint));
  }
  throw CheckpointError("unknown model kind '" + kind + "' in '" + checkpoint + "'");
}

int cmd_evaluate(const DataArgs& data, const std::string& checkpoint,
                 const std::string& erm_checkpoint, const std::string& split,
                 const std::string& metric, const std::string& out) {
  const ExperimentConfig cfg = resolve_config(data);
  const Scorer scorer = scorer_for(checkpoint, erm_checkpoint);
  const Dataset dataset = load_dataset(cfg);
  const MetricKind kind = metric.empty() ? cfg.metric : parse_metric(metric);
  emit(to_json(make_report(scorer, dataset, parse_split(split), kind)) + "\n", out);
  return kExitOk;
}

GroupMetrics read_group_metrics(const std::string& path) {
  return group_metrics_from_json(slurp(path));
}

int cmd_select(const std::string& expert_path, const std::string& erm_path,
               const std::string& strategy, double lambda, const std::string& solver,
               const std::string& out) {
  const GroupMetrics expert = read_group_metrics(expert_path);
  const GroupMetrics erm = read_group_metrics(erm_path);
  const Strategy s = parse_strategy(strategy);
  IpSolver ip_solver = IpSolver::kAuto;
  if (solver == "enumerate") ip_solver = IpSolver::kEnumerate;
  if (solver == "bnb") ip_solver = IpSolver::kBranchAndBound;
  const SelectionDecision d =
      s == Strategy::kGreedy ? select_greedy(expert, erm) : select_ip(expert, erm, lambda, ip_solver);
  emit(to_json(d) + "\n", out);
  return kExitOk;
}

int cmd_export_repr(const DataArgs& data, const std::string& checkpoint,
                    const std::string& split, const std::string& out) {
  const ExperimentConfig cfg = resolve_config(data);
  const std::string kind = checkpoint_model(checkpoint);
  const Dataset dataset = load_dataset(cfg);
  const Split sp = parse_split(split);
  Representations reps;
  if (kind == "fairsde") {
    reps = extract_representations(load_fairsde_checkpoint(checkpoint), dataset, sp);
  } else if (kind == "erm") {
    reps = extract_representations(load_erm_checkpoint(checkpoint), dataset, sp);
  } else {
    throw CheckpointError("export-repr needs an erm or fairsde checkpoint, got '" + kind + "'");
  }
  std::ostringstream ss;
  write_representations_csv(reps, ss);
  emit(ss.str(), out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairsde: fairness-aware selective diversity experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fairsde 0.1.0");

  const CLI::IsMember kSplits({"train", "val", "test"});
  DataArgs data;
  std::string out;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;

  auto* run = app.add_subcommand("run", "Run the full multi-seed experiment from a config");
  run->add_option("-c,--config", data.config, "Experiment config file")->required();
  run->add_option("-o,--output-dir", out_dir, "Override output.dir");
  run->add_option("--seeds", seeds, "Override the seed list")->delimiter(',');

  std::optional<std::uint64_t> gen_seed;
  std::optional<std::size_t> gen_n;
  auto* gen = app.add_subcommand("gen-data", "Write the configured synthetic dataset as CSV");
  gen->add_option("-c,--config", data.config, "Experiment config file (default preset if absent)");
  gen->add_option("--seed", gen_seed, "Override data.seed");
  gen->add_option("--n-train", gen_n, "Override data.n_train for the preset");
  gen->add_option("-o,--out", out, "Output CSV (default stdout)");

  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "Train ERM, decoupled and FairSDE models for one seed");
  add_data_options(train, data);
  train->add_option("--seed", train_seed, "Training seed");
  train->add_option("-o,--output-dir", out_dir, "Checkpoint directory")->required();

  std::string checkpoint;
  std::string erm_checkpoint;
  std::string split = "val";
  std::string metric;
  auto* evaluate = app.add_subcommand("evaluate", "Per-group metrics of a checkpoint as JSON");
  add_data_options(evaluate, data);
  evaluate->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--erm-checkpoint", erm_checkpoint, "Backbone for decoupled heads");
  evaluate->add_option("--split", split, "train, val or test")->check(kSplits);
  evaluate->add_option("--metric", metric, "accuracy or auc (default: config)")
      ->check(CLI::IsMember({"accuracy", "auc"}));
  evaluate->add_option("-o,--out", out, "Output JSON (default stdout)");

  std::string expert_path;
  std::string erm_path;
  std::string strategy = "ip";
  double lambda = kDefaultSelectionLambda;
  std::string solver = "auto";
  auto* select = app.add_subcommand("select", "Choose per-group experts from stored metrics");
  select->add_option("--expert", expert_path, "Expert GroupMetrics or report JSON")->required();
  select->add_option("--erm", erm_path, "ERM GroupMetrics or report JSON")->required();
  select->add_option("--strategy", strategy, "greedy or ip")
      ->check(CLI::IsMember({"greedy", "gs", "ip"}));
  select->add_option("--lambda", lambda, "IP utility weight");
  select->add_option("--solver", solver, "auto, enumerate or bnb")
      ->check(CLI::IsMember({"auto", "enumerate", "bnb"}));
  select->add_option("-o,--out", out, "Output JSON (default stdout)");

  std::string repr_split = "test";
  auto* repr = app.add_subcommand("export-repr", "Write f(x) rows with label and group columns");
  add_data_options(repr, data);
  repr->add_option("--checkpoint", checkpoint, "FairSDE or ERM checkpoint")->required();
  repr->add_option("--split", repr_split, "train, val or test")->check(kSplits);
  repr->add_option("-o,--out", out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(data, out_dir, seeds);
    if (*gen) return cmd_gen_data(data, out, gen_seed, gen_n);
    if (*train) return cmd_train(data, train_seed, out_dir);
    if (*evaluate) return cmd_evaluate(data, checkpoint, erm_checkpoint, split, metric, out);
    if (*select) return cmd_select(expert_path, erm_path, strategy, lambda, solver, out);
    if (*repr) return cmd_export_repr(data, checkpoint, repr_split, out);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.cause() == StageError::Cause::kDivergence ? kExitDivergence : kExitData;
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
