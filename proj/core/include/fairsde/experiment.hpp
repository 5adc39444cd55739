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

#ifndef FAIRSDE_EXPERIMENT_HPP_
#define FAIRSDE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsde/data.hpp"
#include "fairsde/report.hpp"
#include "fairsde/selection.hpp"
#include "fairsde/training.hpp"

namespace fairsde {

inline constexpr int kConfigVersion = 1;

// Raised for malformed configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A failure inside one stage of one seed's run. `cause` classifies the
// original exception so front ends can map it to an exit status.
class StageError : public std::runtime_error {
 public:
  enum class Cause { kData, kDivergence, kOther };

  StageError(std::string stage, std::uint64_t seed, Cause cause,
             const std::string& what);

  const std::string& stage() const { return stage_; }
  std::uint64_t seed() const { return seed_; }
  Cause cause() const { return cause_; }

 private:
  std::string stage_;
  std::uint64_t seed_;
  Cause cause_;
};

struct DataSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  // Synthetic: either a named preset or explicit cells.
  std::string preset = "minority_shift";
  std::size_t preset_n_train = 4000;
  SyntheticConfig synthetic;
  // CSV.
  std::filesystem::path csv_path;
  CsvSchema schema;
  std::uint64_t seed = 2026;  // generation seed / 8:1:1 split seed
};

struct ExperimentConfig {
  DataSource data;
  HyperParams hp;
  MetricKind metric = MetricKind::kAccuracy;
  std::vector<Strategy> strategies = {Strategy::kGreedy, Strategy::kIp};
  double lambda_sel = kDefaultSelectionLambda;
  ProbeOptions probe;
  std::filesystem::path output_dir = "fairsde_out";
  std::vector<std::uint64_t> seeds = {1};

  void validate() const;
};

// Flat "key = value" text, one pair per line, '#' starts a comment. The
// first key must be `version`. See docs/formats.md for the key list.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical serialization: every key, fixed order, round-trip exact.
std::string format_config(const ExperimentConfig& config);

SyntheticConfig resolve_synthetic(const DataSource& source);
Dataset load_dataset(const ExperimentConfig& config);

struct ModelReports {
  MetricsReport val;
  MetricsReport test;
};

struct SeedResult {
  std::uint64_t seed = 0;
  ErmModel erm;
  DecoupledModel decoupled;
  FairSdeModel fairsde;

  ModelReports erm_reports;
  ModelReports decoupled_reports;
  ModelReports expert_reports;  // every group served by its expert
  // Routed predictors, one per configured strategy.
  std::map<Strategy, SelectionDecision> decisions;
  std::map<Strategy, ModelReports> routed_reports;

  double discriminator_accuracy_val = 0.0;
  double probe_accuracy_erm = 0.0;
  double probe_accuracy_fairsde = 0.0;
};

SeedResult run_seed(const Dataset& dataset, const ExperimentConfig& config,
                    std::uint64_t seed);

struct ExperimentBundle {
  std::vector<SeedResult> seeds;
};

ExperimentBundle run_experiment(const ExperimentConfig& config);
ExperimentBundle run_experiment(const ExperimentConfig& config, const Dataset& dataset);

// Scalar summary of a seed, keyed like "erm.val.mf" or "ip.test.gap".
std::map<std::string, double> seed_scalars(const SeedResult& result);

std::string seed_report_json(const SeedResult& result, const ExperimentConfig& config);
// Mean and population standard deviation of every seed scalar.
std::string aggregate_json(const ExperimentBundle& bundle, const ExperimentConfig& config);

// Writes report_<seed>.json, training_log_<seed>.csv,
// representations_<seed>.csv (FairSDE backbone on the test split) and
// aggregate.json into `dir`, creating it when needed.
void write_bundle(const ExperimentBundle& bundle, const ExperimentConfig& config,
                  const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace fairsde

#endif  // FAIRSDE_EXPERIMENT_HPP_
