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

#include "fairsde/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "fairsde/checkpoint.hpp"
#include "json_io.hpp"

namespace fairsde {

StageError::StageError(std::string stage, std::uint64_t seed, Cause cause,
                       const std::string& what)
    : std::runtime_error("seed " + std::to_string(seed) + ", stage '" + stage +
                         "': " + what),
      stage_(std::move(stage)),
      seed_(seed),
      cause_(cause) {}

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* begin = v.data();
  const char* end = begin + v.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" +
                      v + "'");
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::vector<std::string> items;
  for (double v : values) items.push_back(fmt(v));
  return join(items);
}

// Parses "synthetic.cell.<g>.<c>.<field>".
bool parse_cell_key(const std::string& key, int& g, int& c, std::string& field) {
  static const std::string prefix = "synthetic.cell.";
  if (key.rfind(prefix, 0) != 0) return false;
  const std::string rest = key.substr(prefix.size());
  const auto d1 = rest.find('.');
  const auto d2 = rest.find('.', d1 == std::string::npos ? d1 : d1 + 1);
  if (d1 == std::string::npos || d2 == std::string::npos) return false;
  try {
    g = std::stoi(rest.substr(0, d1));
    c = std::stoi(rest.substr(d1 + 1, d2 - d1 - 1));
  } catch (const std::exception&) {
    return false;
  }
  field = rest.substr(d2 + 1);
  return g >= 0 && c >= 0;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: at least one seed is required");
  if (strategies.empty()) throw ConfigError("config: no selection strategy");
  if (!(lambda_sel >= 0.0)) throw ConfigError("config: selection.lambda must be >= 0");
  if (probe.epochs < 1 || probe.batch_size < 1 || !(probe.lr > 0.0)) {
    throw ConfigError("config: invalid probe settings");
  }
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (data.kind == DataSource::Kind::kCsv && data.csv_path.empty()) {
    throw ConfigError("config: data.source = csv needs data.csv");
  }
  if (data.kind == DataSource::Kind::kSynthetic && data.preset != "none" &&
      data.preset != "minority_shift") {
    throw ConfigError("config: unknown synthetic preset '" + data.preset + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  bool saw_version = false;
  std::map<std::pair<int, int>, SyntheticCell> cells;
  bool saw_key = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (!saw_key) {
      saw_key = true;
      if (key != "version") throw ConfigError("config: first key must be 'version'");
    }
    try {
      int g = 0, c = 0;
      std::string field;
      if (key == "version") {
        if (to_u64(key, value) != static_cast<std::uint64_t>(kConfigVersion)) {
          throw ConfigError("config: unsupported version " + value);
        }
        saw_version = true;
      } else if (key == "data.source") {
        if (value == "synthetic") {
          cfg.data.kind = DataSource::Kind::kSynthetic;
        } else if (value == "csv") {
          cfg.data.kind = DataSource::Kind::kCsv;
        } else {
          throw ConfigError("config: data.source must be synthetic or csv");
        }
      } else if (key == "data.seed") {
        cfg.data.seed = to_u64(key, value);
      } else if (key == "data.preset") {
        cfg.data.preset = value;
      } else if (key == "data.n_train") {
        cfg.data.preset_n_train = to_u64(key, value);
      } else if (key == "data.csv") {
        cfg.data.csv_path = value;
      } else if (key == "data.label_column") {
        cfg.data.schema.label_column = value;
      } else if (key == "data.group_column") {
        cfg.data.schema.group_column = value;
      } else if (key == "data.split_column") {
        cfg.data.schema.split_column = value == "none" ? "" : value;
      } else if (key == "data.feature_columns") {
        cfg.data.schema.feature_columns = split_list(value);
      } else if (key == "data.classes") {
        cfg.data.schema.num_classes = static_cast<int>(to_u64(key, value));
      } else if (key == "data.groups") {
        cfg.data.schema.num_groups = static_cast<int>(to_u64(key, value));
      } else if (key == "synthetic.dim") {
        cfg.data.synthetic.dim = to_u64(key, value);
      } else if (key == "synthetic.classes") {
        cfg.data.synthetic.num_classes = static_cast<int>(to_u64(key, value));
      } else if (key == "synthetic.groups") {
        cfg.data.synthetic.num_groups = static_cast<int>(to_u64(key, value));
      } else if (parse_cell_key(key, g, c, field)) {
        auto& cell = cells[{g, c}];
        if (field == "mean") {
          cell.mean = to_doubles(key, value);
        } else if (field == "std") {
          cell.stddev = to_double(key, value);
        } else if (field == "counts") {
          const auto items = split_list(value);
          if (items.size() != 3) throw ConfigError("config: " + key + " needs 3 counts");
          for (std::size_t s = 0; s < 3; ++s) cell.counts[s] = to_u64(key, items[s]);
        } else {
          throw ConfigError("config: unknown key '" + key + "'");
        }
      } else if (key == "hp.lambda_disc") {
        cfg.hp.lambda_disc = to_double(key, value);
      } else if (key == "hp.lambda_virt") {
        cfg.hp.lambda_virt = to_double(key, value);
      } else if (key == "hp.lambda_div") {
        cfg.hp.lambda_div = to_double(key, value);
      } else if (key == "hp.lr") {
        cfg.hp.lr = to_double(key, value);
      } else if (key == "hp.momentum") {
        cfg.hp.momentum = to_double(key, value);
      } else if (key == "hp.lr_decay") {
        cfg.hp.lr_decay = to_double(key, value);
      } else if (key == "hp.batch_size") {
        cfg.hp.batch_size = to_u64(key, value);
      } else if (key == "hp.epochs") {
        cfg.hp.epochs = static_cast<int>(to_u64(key, value));
      } else if (key == "hp.negative_rule") {
        if (value == "and") {
          cfg.hp.negative_rule = NegativeRule::kClassAndGroup;
        } else if (value == "or") {
          cfg.hp.negative_rule = NegativeRule::kClassOrGroup;
        } else {
          throw ConfigError("config: hp.negative_rule must be 'and' or 'or'");
        }
      } else if (key == "hp.virt_scope") {
        if (value == "all") {
          cfg.hp.virt_scope = VirtScope::kAllGroups;
        } else if (value == "own") {
          cfg.hp.virt_scope = VirtScope::kOwnGroup;
        } else {
          throw ConfigError("config: hp.virt_scope must be 'all' or 'own'");
        }
      } else if (key == "model.hidden") {
        cfg.hp.arch.hidden = to_u64(key, value);
      } else if (key == "model.repr_dim") {
        cfg.hp.arch.repr_dim = to_u64(key, value);
      } else if (key == "eval.metric") {
        cfg.metric = parse_metric(value);
      } else if (key == "selection.strategies") {
        cfg.strategies.clear();
        for (const auto& s : split_list(value)) cfg.strategies.push_back(parse_strategy(s));
      } else if (key == "selection.lambda") {
        cfg.lambda_sel = to_double(key, value);
      } else if (key == "probe.epochs") {
        cfg.probe.epochs = static_cast<int>(to_u64(key, value));
      } else if (key == "probe.lr") {
        cfg.probe.lr = to_double(key, value);
      } else if (key == "probe.batch_size") {
        cfg.probe.batch_size = to_u64(key, value);
      } else if (key == "output.dir") {
        cfg.output_dir = value;
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : split_list(value)) cfg.seeds.push_back(to_u64(key, s));
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!saw_version) throw ConfigError("config: missing 'version'");

  if (!cells.empty()) {
    auto& syn = cfg.data.synthetic;
    syn.cells.assign(static_cast<std::size_t>(syn.num_classes * syn.num_groups), {});
    for (auto& [gc, cell] : cells) {
      if (gc.first >= syn.num_groups || gc.second >= syn.num_classes) {
        throw ConfigError("config: synthetic cell (" + std::to_string(gc.first) + ", " +
                          std::to_string(gc.second) + ") outside declared shape");
      }
      syn.cell(gc.first, gc.second) = std::move(cell);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
  kv("version", std::to_string(kConfigVersion));
  const auto& d = cfg.data;
  if (d.kind == DataSource::Kind::kSynthetic) {
    kv("data.source", "synthetic");
    kv("data.seed", std::to_string(d.seed));
    kv("data.preset", d.preset);
    if (d.preset == "none") {
      const auto& s = d.synthetic;
      kv("synthetic.dim", std::to_string(s.dim));
      kv("synthetic.classes", std::to_string(s.num_classes));
      kv("synthetic.groups", std::to_string(s.num_groups));
      for (int g = 0; g < s.num_groups; ++g) {
        for (int c = 0; c < s.num_classes; ++c) {
          const auto& cell = s.cell(g, c);
          const std::string p = "synthetic.cell." + std::to_string(g) + "." + std::to_string(c);
          kv(p + ".mean", join_doubles(cell.mean));
          kv(p + ".std", fmt(cell.stddev));
          kv(p + ".counts", std::to_string(cell.counts[0]) + "," +
                                std::to_string(cell.counts[1]) + "," +
                                std::to_string(cell.counts[2]));
        }
      }
    } else {
      kv("data.n_train", std::to_string(d.preset_n_train));
    }
  } else {
    kv("data.source", "csv");
    kv("data.seed", std::to_string(d.seed));
    kv("data.csv", d.csv_path.string());
    kv("data.label_column", d.schema.label_column);
    kv("data.group_column", d.schema.group_column);
    kv("data.split_column", d.schema.split_column.empty() ? "none" : d.schema.split_column);
    kv("data.feature_columns", join(d.schema.feature_columns));
    kv("data.classes", std::to_string(d.schema.num_classes));
    kv("data.groups", std::to_string(d.schema.num_groups));
  }
  const auto& hp = cfg.hp;
  kv("hp.lambda_disc", fmt(hp.lambda_disc));
  kv("hp.lambda_virt", fmt(hp.lambda_virt));
  kv("hp.lambda_div", fmt(hp.lambda_div));
  kv("hp.lr", fmt(hp.lr));
  kv("hp.momentum", fmt(hp.momentum));
  kv("hp.lr_decay", fmt(hp.lr_decay));
  kv("hp.batch_size", std::to_string(hp.batch_size));
  kv("hp.epochs", std::to_string(hp.epochs));
  kv("hp.negative_rule", hp.negative_rule == NegativeRule::kClassAndGroup ? "and" : "or");
  kv("hp.virt_scope", hp.virt_scope == VirtScope::kAllGroups ? "all" : "own");
  kv("model.hidden", std::to_string(hp.arch.hidden));
  kv("model.repr_dim", std::to_string(hp.arch.repr_dim));
  kv("eval.metric", metric_name(cfg.metric));
  std::vector<std::string> strategies;
  for (Strategy s : cfg.strategies) strategies.push_back(strategy_name(s));
  kv("selection.strategies", join(strategies));
  kv("selection.lambda", fmt(cfg.lambda_sel));
  kv("probe.epochs", std::to_string(cfg.probe.epochs));
  kv("probe.lr", fmt(cfg.probe.lr));
  kv("probe.batch_size", std::to_string(cfg.probe.batch_size));
  kv("output.dir", cfg.output_dir.string());
  std::vector<std::string> seeds;
  for (auto s : cfg.seeds) seeds.push_back(std::to_string(s));
  kv("seeds", join(seeds));
  return out.str();
}

SyntheticConfig resolve_synthetic(const DataSource& source) {
  if (source.preset == "minority_shift") {
    return minority_shift_config(source.seed, source.preset_n_train);
  }
  SyntheticConfig cfg = source.synthetic;
  cfg.seed = source.seed;
  return cfg;
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.data.kind == DataSource::Kind::kSynthetic) {
    return generate_synthetic(resolve_synthetic(config.data));
  }
  CsvSchema schema = config.data.schema;
  schema.split_seed = config.data.seed;
  return load_csv(config.data.csv_path, schema);
}

namespace {

template <typename Fn>
auto run_stage(const std::string& stage, std::uint64_t seed, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const DataError& e) {
    throw StageError(stage, seed, StageError::Cause::kData, e.what());
  } catch (const DivergenceError& e) {
    throw StageError(stage, seed, StageError::Cause::kDivergence, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, seed, StageError::Cause::kOther, e.what());
  }
}

ModelReports reports_for(const Scorer& scorer, const Dataset& dataset, MetricKind kind) {
  return ModelReports{make_report(scorer, dataset, Split::kVal, kind),
                      make_report(scorer, dataset, Split::kTest, kind)};
}

}  // namespace

SeedResult run_seed(const Dataset& dataset, const ExperimentConfig& config,
                    std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  HyperParams hp = config.hp;
  hp.seed = seed;
  const MetricKind kind = config.metric;

  r.erm = run_stage("train_erm", seed, [&] { return train_erm(dataset, hp); });
  r.decoupled = run_stage("train_decoupled", seed,
                          [&] { return train_decoupled_baseline(r.erm, dataset, hp); });
  r.fairsde = run_stage("train_fairsde", seed, [&] { return train_fairsde(dataset, hp); });

  run_stage("evaluate", seed, [&] {
    r.erm_reports = reports_for(erm_scorer(r.erm), dataset, kind);
    r.decoupled_reports = reports_for(decoupled_scorer(r.erm, r.decoupled), dataset, kind);
    r.expert_reports = reports_for(expert_scorer(r.fairsde), dataset, kind);
    r.discriminator_accuracy_val = discriminator_accuracy(r.fairsde, dataset, Split::kVal);
    return 0;
  });

  run_stage("select", seed, [&] {
    const GroupMetrics& expert_val = r.expert_reports.val.per_group;
    const GroupMetrics& erm_val = r.erm_reports.val.per_group;
    for (Strategy s : config.strategies) {
      SelectionDecision d = s == Strategy::kGreedy
                                ? select_greedy(expert_val, erm_val)
                                : select_ip(expert_val, erm_val, config.lambda_sel);
      ModelReports routed = reports_for(routed_scorer(d, r.fairsde, r.erm), dataset, kind);
      routed.val.selection = d;
      routed.test.selection = d;
      r.decisions[s] = std::move(d);
      r.routed_reports[s] = std::move(routed);
    }
    return 0;
  });

  run_stage("probe", seed, [&] {
    ProbeOptions opts = config.probe;
    opts.seed = SeedLineage::from(seed).probe;
    const int G = dataset.num_groups();
    const auto erm_train = extract_representations(r.erm, dataset, Split::kTrain);
    const auto erm_val = extract_representations(r.erm, dataset, Split::kVal);
    const auto fs_train = extract_representations(r.fairsde, dataset, Split::kTrain);
    const auto fs_val = extract_representations(r.fairsde, dataset, Split::kVal);
    r.probe_accuracy_erm = train_group_probe(erm_train, erm_val, G, opts).eval_accuracy;
    r.probe_accuracy_fairsde = train_group_probe(fs_train, fs_val, G, opts).eval_accuracy;
    return 0;
  });
  return r;
}

ExperimentBundle run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  config.validate();
  ExperimentBundle bundle;
  for (std::uint64_t seed : config.seeds) bundle.seeds.push_back(run_seed(dataset, config, seed));
  return bundle;
}

ExperimentBundle run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset dataset = run_stage("load_data", config.seeds.front(),
                                    [&] { return load_dataset(config); });
  return run_experiment(config, dataset);
}

std::map<std::string, double> seed_scalars(const SeedResult& r) {
  std::map<std::string, double> out;
  auto add_report = [&](const std::string& prefix, const MetricsReport& rep) {
    out[prefix + ".overall"] = rep.overall;
    out[prefix + ".mf"] = rep.mf;
    out[prefix + ".gap"] = rep.gap;
    if (rep.eo) out[prefix + ".eo"] = *rep.eo;
    for (std::size_t a = 0; a < rep.per_group.values.size(); ++a) {
      out[prefix + ".group" + std::to_string(a)] = rep.per_group.values[a];
    }
  };
  auto add_model = [&](const std::string& name, const ModelReports& m) {
    add_report(name + ".val", m.val);
    add_report(name + ".test", m.test);
  };
  add_model("erm", r.erm_reports);
  add_model("decoupled", r.decoupled_reports);
  add_model("experts", r.expert_reports);
  for (const auto& [s, m] : r.routed_reports) {
    add_model(strategy_name(s), m);
    out[strategy_name(s) + ".experts_used"] = double(r.decisions.at(s).experts_used());
  }
  out["separability.discriminator_val"] = r.discriminator_accuracy_val;
  out["separability.probe_erm"] = r.probe_accuracy_erm;
  out["separability.probe_fairsde"] = r.probe_accuracy_fairsde;
  return out;
}

std::string seed_report_json(const SeedResult& r, const ExperimentConfig& config) {
  using json_io::json;
  const auto lineage = SeedLineage::from(r.seed);
  auto model = [](const ModelReports& m) {
    return json{{"val", json_io::encode(m.val)}, {"test", json_io::encode(m.test)}};
  };
  json selections = json::object();
  for (const auto& [s, d] : r.decisions) {
    const auto& m = r.routed_reports.at(s);
    selections[strategy_name(s)] = {{"decision", json_io::encode(d)},
                                    {"val", json_io::encode(m.val)},
                                    {"test", json_io::encode(m.test)}};
  }
  std::size_t skipped = 0;
  for (const auto& e : r.fairsde.log) skipped += e.skipped_div;
  json j{{"format", "fairsde-report"},
         {"version", 1},
         {"seed", r.seed},
         {"seed_lineage",
          {{"init", lineage.init},
           {"shuffle", lineage.shuffle},
           {"pairs", lineage.pairs},
           {"probe", lineage.probe}}},
         {"config", format_config(config)},
         {"models",
          {{"erm", model(r.erm_reports)},
           {"decoupled", model(r.decoupled_reports)},
           {"experts", model(r.expert_reports)}}},
         {"selections", selections},
         {"separability",
          {{"discriminator_accuracy_val", r.discriminator_accuracy_val},
           {"probe_accuracy_erm", r.probe_accuracy_erm},
           {"probe_accuracy_fairsde", r.probe_accuracy_fairsde}}},
         {"training",
          {{"erm_log", json_io::encode(r.erm.log)},
           {"fairsde_log", json_io::encode(r.fairsde.log)},
           {"fairsde_center_reinits", r.fairsde.center_reinits},
           {"fairsde_skipped_div_samples", skipped}}}};
  return j.dump(2) + "\n";
}

std::string aggregate_json(const ExperimentBundle& bundle, const ExperimentConfig& config) {
  using json_io::json;
  std::vector<std::map<std::string, double>> per_seed;
  json seeds = json::array();
  for (const auto& r : bundle.seeds) {
    per_seed.push_back(seed_scalars(r));
    seeds.push_back(r.seed);
  }
  json metrics = json::object();
  if (!per_seed.empty()) {
    for (const auto& [key, first] : per_seed.front()) {
      std::vector<double> values;
      for (const auto& m : per_seed) {
        if (const auto it = m.find(key); it != m.end()) values.push_back(it->second);
      }
      if (values.size() != per_seed.size()) continue;
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / double(values.size());
      double sq = 0.0;
      for (double v : values) sq += (v - mean) * (v - mean);
      const double stddev = std::sqrt(sq / double(values.size()));
      metrics[key] = {{"mean", mean}, {"std", stddev}, {"n", values.size()}};
    }
  }
  json j{{"format", "fairsde-aggregate"},
         {"version", 1},
         {"seeds", seeds},
         {"config", format_config(config)},
         {"metrics", metrics}};
  return j.dump(2) + "\n";
}

void write_bundle(const ExperimentBundle& bundle, const ExperimentConfig& config,
                  const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  for (const auto& r : bundle.seeds) {
    const std::string s = std::to_string(r.seed);
    open("report_" + s + ".json") << seed_report_json(r, config);
    {
      auto out = open("training_log_" + s + ".csv");
      write_training_log_csv(r.fairsde.log, out);
    }
    {
      auto out = open("representations_" + s + ".csv");
      write_representations_csv(extract_representations(r.fairsde, dataset, Split::kTest),
                                out);
    }
  }
  open("aggregate.json") << aggregate_json(bundle, config);
}

}  // namespace fairsde
