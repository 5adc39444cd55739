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

#ifndef FAIRSDE_DATA_HPP_
#define FAIRSDE_DATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fairsde/matrix.hpp"

namespace fairsde {

// Raised for malformed inputs: bad CSV cells, missing columns, invalid
// synthetic configurations, empty splits.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kVal,
                                                    Split::kTest};

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct Sample {
  std::vector<double> features;
  int label = 0;
  int group = 0;
};

// Labeled, group-annotated feature vectors with a split tag per sample.
// Immutable after construction; the constructor enforces every invariant.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, int num_classes, int num_groups,
          std::vector<Sample> samples, std::vector<Split> splits);

  std::size_t dim() const { return features_.cols; }
  int num_classes() const { return num_classes_; }
  int num_groups() const { return num_groups_; }
  std::size_t size() const { return labels_.size(); }

  const Matrix& features() const { return features_; }
  std::span<const double> features(std::size_t i) const {
    return features_.row(i);
  }
  int label(std::size_t i) const { return labels_[i]; }
  int group(std::size_t i) const { return groups_[i]; }
  Split split(std::size_t i) const { return splits_[i]; }
  Sample sample(std::size_t i) const;

  // Indices of the samples tagged with `split`, in dataset order.
  std::vector<std::size_t> indices(Split split) const;

  // Materialized view of one split, row order matching indices(split).
  struct View {
    Matrix x;
    std::vector<int> labels;
    std::vector<int> groups;
  };
  View view(Split split) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::vector<int> groups_;
  std::vector<Split> splits_;
  int num_classes_ = 0;
  int num_groups_ = 0;
};

// One (group, class) cell of a synthetic dataset: isotropic Gaussian with
// the given mean and standard deviation, and a sample count per split.
struct SyntheticCell {
  std::vector<double> mean;
  double stddev = 1.0;
  std::array<std::size_t, 3> counts = {0, 0, 0};  // train, val, test
};

struct SyntheticConfig {
  std::size_t dim = 0;
  int num_classes = 0;
  int num_groups = 0;
  // Indexed [group * num_classes + class].
  std::vector<SyntheticCell> cells;
  std::uint64_t seed = 0;

  SyntheticCell& cell(int group, int label) {
    return cells[static_cast<std::size_t>(group * num_classes + label)];
  }
  const SyntheticCell& cell(int group, int label) const {
    return cells[static_cast<std::size_t>(group * num_classes + label)];
  }

  void validate() const;
};

// Samples are emitted split by split, then group by group, then class by
// class, drawing from a single Rng seeded with `config.seed`.
Dataset generate_synthetic(const SyntheticConfig& config);

// Two groups, two classes, ten features. The minority group (20% of the
// data) has class-conditionals rotated away from the majority's decision
// direction and is offset by three standard deviations along a nuisance
// axis, so a pooled model tuned to the majority underperforms it.
SyntheticConfig minority_shift_config(std::uint64_t seed = 2026,
                                      std::size_t n_train = 4000);

struct CsvSchema {
  std::string label_column = "label";
  std::string group_column = "group";
  // Empty disables the split column; rows are then split 8:1:1.
  std::string split_column = "split";
  // Empty means: every column named f0, f1, ... in header order.
  std::vector<std::string> feature_columns;
  // Declared ranges; zero means infer as max index + 1.
  int num_classes = 0;
  int num_groups = 0;
  std::uint64_t split_seed = 0;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset read_csv(std::istream& in, const CsvSchema& schema = {});

// Writes f0..f{d-1},label,group,split with shortest round-trip formatting,
// so read_csv(write_csv(ds)) reproduces every feature bit-exactly.
void write_csv(const Dataset& dataset, std::ostream& out);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

// Stratified by (group, class): within each cell rows are shuffled, given a
// fractional rank, and the global order by rank is cut at 80% / 90%.
std::vector<Split> stratified_split(std::span<const int> labels,
                                    std::span<const int> groups,
                                    int num_classes, std::uint64_t seed);

struct GroupStats {
  std::vector<std::size_t> counts;
  std::vector<double> proportions;
  std::size_t total = 0;
  // Set when at least one group has no samples in the split.
  bool missing_group = false;
};

GroupStats group_stats(const Dataset& dataset, Split split);
GroupStats group_stats(std::span<const int> groups, int num_groups);

}  // namespace fairsde

#endif  // FAIRSDE_DATA_HPP_
