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

#include "fairsde/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "fairsde/rng.hpp"

namespace fairsde {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split tag '" + std::string(name) + "'");
}

Dataset::Dataset(std::size_t dim, int num_classes, int num_groups,
                 std::vector<Sample> samples, std::vector<Split> splits)
    : features_(samples.size(), dim),
      num_classes_(num_classes),
      num_groups_(num_groups) {
  if (dim == 0) throw DataError("dataset dimension must be positive");
  if (num_classes < 1 || num_groups < 1) {
    throw DataError("dataset needs at least one class and one group");
  }
  if (splits.size() != samples.size()) {
    throw DataError("split tags do not match sample count");
  }
  labels_.reserve(samples.size());
  groups_.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.features.size() != dim) {
      throw DataError("sample " + std::to_string(i) + " has " +
                      std::to_string(s.features.size()) +
                      " features, expected " + std::to_string(dim));
    }
    for (double v : s.features) {
      if (!std::isfinite(v)) {
        throw DataError("sample " + std::to_string(i) +
                        " has a non-finite feature");
      }
    }
    if (s.label < 0 || s.label >= num_classes) {
      throw DataError("sample " + std::to_string(i) + " label " +
                      std::to_string(s.label) + " out of range");
    }
    if (s.group < 0 || s.group >= num_groups) {
      throw DataError("sample " + std::to_string(i) + " group " +
                      std::to_string(s.group) + " out of range");
    }
    std::copy(s.features.begin(), s.features.end(), features_.row(i).begin());
    labels_.push_back(s.label);
    groups_.push_back(s.group);
  }
  splits_ = std::move(splits);

  const auto cells = static_cast<std::size_t>(num_classes * num_groups);
  std::vector<bool> in_train(cells, false);
  for (std::size_t i = 0; i < size(); ++i) {
    if (splits_[i] == Split::kTrain) {
      in_train[static_cast<std::size_t>(groups_[i] * num_classes + labels_[i])] =
          true;
    }
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const auto cell =
        static_cast<std::size_t>(groups_[i] * num_classes + labels_[i]);
    if (!in_train[cell]) {
      throw DataError("cell (group " + std::to_string(groups_[i]) +
                      ", class " + std::to_string(labels_[i]) +
                      ") appears in " + std::string(split_name(splits_[i])) +
                      " but not in train");
    }
  }
}

Sample Dataset::sample(std::size_t i) const {
  const auto row = features_.row(i);
  return Sample{{row.begin(), row.end()}, labels_[i], groups_[i]};
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (splits_[i] == split) out.push_back(i);
  }
  return out;
}

Dataset::View Dataset::view(Split split) const {
  const auto idx = indices(split);
  View v{Matrix(idx.size(), dim()), {}, {}};
  v.labels.reserve(idx.size());
  v.groups.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = features_.row(idx[r]);
    std::copy(src.begin(), src.end(), v.x.row(r).begin());
    v.labels.push_back(labels_[idx[r]]);
    v.groups.push_back(groups_[idx[r]]);
  }
  return v;
}

void SyntheticConfig::validate() const {
  if (dim == 0) throw DataError("synthetic: dimension must be positive");
  if (num_classes < 1 || num_groups < 1) {
    throw DataError("synthetic: need at least one class and one group");
  }
  if (cells.size() != static_cast<std::size_t>(num_classes * num_groups)) {
    throw DataError("synthetic: expected " +
                    std::to_string(num_classes * num_groups) + " cells, got " +
                    std::to_string(cells.size()));
  }
  for (int g = 0; g < num_groups; ++g) {
    for (int c = 0; c < num_classes; ++c) {
      const auto& cell_cfg = cell(g, c);
      const std::string where =
          "synthetic cell (group " + std::to_string(g) + ", class " +
          std::to_string(c) + ")";
      if (cell_cfg.mean.size() != dim) {
        throw DataError(where + ": mean has dimension " +
                        std::to_string(cell_cfg.mean.size()) + ", expected " +
                        std::to_string(dim));
      }
      if (!(cell_cfg.stddev > 0.0) || !std::isfinite(cell_cfg.stddev)) {
        throw DataError(where + ": standard deviation must be positive");
      }
      for (std::size_t n : cell_cfg.counts) {
        if (n == 0) throw DataError(where + ": every split count must be >= 1");
      }
    }
  }
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<Sample> samples;
  std::vector<Split> splits;
  for (Split split : kAllSplits) {
    for (int g = 0; g < config.num_groups; ++g) {
      for (int c = 0; c < config.num_classes; ++c) {
        const auto& cell_cfg = config.cell(g, c);
        const std::size_t n = cell_cfg.counts[static_cast<std::size_t>(split)];
        for (std::size_t k = 0; k < n; ++k) {
          Sample s{std::vector<double>(config.dim), c, g};
          for (std::size_t j = 0; j < config.dim; ++j) {
            s.features[j] = cell_cfg.mean[j] + cell_cfg.stddev * rng.normal();
          }
          samples.push_back(std::move(s));
          splits.push_back(split);
        }
      }
    }
  }
  return Dataset(config.dim, config.num_classes, config.num_groups,
                 std::move(samples), std::move(splits));
}

SyntheticConfig minority_shift_config(std::uint64_t seed, std::size_t n_train) {
  SyntheticConfig cfg;
  cfg.dim = 10;
  cfg.num_classes = 2;
  cfg.num_groups = 2;
  cfg.seed = seed;
  cfg.cells.resize(4);

  const std::size_t n_val = n_train / 8;
  // 80/20 group imbalance, classes balanced within each group.
  const std::array<double, 2> group_share = {0.8, 0.2};
  for (int g = 0; g < 2; ++g) {
    for (int c = 0; c < 2; ++c) {
      auto& cell = cfg.cell(g, c);
      cell.mean.assign(cfg.dim, 0.0);
      cell.stddev = 1.0;
      const double share = group_share[static_cast<std::size_t>(g)] / 2.0;
      const auto tr = static_cast<std::size_t>(std::llround(share * double(n_train)));
      const auto va = static_cast<std::size_t>(std::llround(share * double(n_val)));
      cell.counts = {tr, va, va};
    }
  }
  const double sign[2] = {-1.0, 1.0};
  for (int c = 0; c < 2; ++c) {
    const double s = sign[c];
    // Majority: classes separated along axis 0.
    cfg.cell(0, c).mean[0] = 1.25 * s;
    // Minority: decision direction rotated by 135 degrees into the (0, 1)
    // plane, plus a class-independent offset on axis 2.
    auto& minority = cfg.cell(1, c).mean;
    minority[0] = -1.0 * s;
    minority[1] = 1.0 * s;
    minority[2] = 3.0;
  }
  return cfg;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& cell, std::size_t row,
                    const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("row " + std::to_string(row) + ", column '" + column +
                    "': non-numeric value '" + cell + "'");
  }
  return value;
}

int parse_index(const std::string& cell, std::size_t row,
                const std::string& column) {
  long long value = 0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || value < 0 ||
      value > 1'000'000) {
    throw DataError("row " + std::to_string(row) + ", column '" + column +
                    "': invalid index '" + cell + "'");
  }
  return static_cast<int>(value);
}

void format_double(std::ostream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

std::vector<Split> stratified_split(std::span<const int> labels,
                                    std::span<const int> groups,
                                    int num_classes, std::uint64_t seed) {
  const std::size_t n = labels.size();
  Rng rng(seed);
  std::unordered_map<long long, std::vector<std::size_t>> cells;
  std::vector<long long> cell_order;
  for (std::size_t i = 0; i < n; ++i) {
    const long long key = static_cast<long long>(groups[i]) * num_classes + labels[i];
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) cell_order.push_back(key);
    it->second.push_back(i);
  }
  std::sort(cell_order.begin(), cell_order.end());

  struct Ranked {
    double rank;
    long long cell;
    std::size_t row;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(n);
  for (long long key : cell_order) {
    auto& rows = cells[key];
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ranked.push_back({(double(k) + 0.5) / double(rows.size()), key, rows[k]});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.cell != b.cell) return a.cell < b.cell;
    return a.row < b.row;
  });

  const std::size_t n_train = (8 * n + 5) / 10;
  const std::size_t n_val = std::min(n - n_train, (n + 5) / 10);
  std::vector<Split> out(n, Split::kTest);
  for (std::size_t k = 0; k < n; ++k) {
    if (k < n_train) {
      out[ranked[k].row] = Split::kTrain;
    } else if (k < n_train + n_val) {
      out[ranked[k].row] = Split::kVal;
    }
  }
  return out;
}

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header row");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require_column = [&](const std::string& name) {
    const auto col = find_column(name);
    if (!col) throw DataError("csv: missing column '" + name + "'");
    return *col;
  };

  const std::size_t label_col = require_column(schema.label_column);
  const std::size_t group_col = require_column(schema.group_column);
  std::optional<std::size_t> split_col;
  if (!schema.split_column.empty()) split_col = find_column(schema.split_column);

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names = schema.feature_columns;
  if (feature_names.empty()) {
    for (std::size_t j = 0;; ++j) {
      const std::string name = "f" + std::to_string(j);
      if (!find_column(name)) break;
      feature_names.push_back(name);
    }
    if (feature_names.empty()) throw DataError("csv: missing column 'f0'");
  }
  for (const auto& name : feature_names) feature_cols.push_back(require_column(name));

  std::vector<Sample> samples;
  std::vector<Split> splits;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    for (auto& c : cells) c = trim(c);
    Sample s;
    s.features.reserve(feature_cols.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      s.features.push_back(parse_double(cells[feature_cols[j]], row, feature_names[j]));
    }
    s.label = parse_index(cells[label_col], row, schema.label_column);
    s.group = parse_index(cells[group_col], row, schema.group_column);
    if (schema.num_classes > 0 && s.label >= schema.num_classes) {
      throw DataError("row " + std::to_string(row) + ": label " +
                      std::to_string(s.label) + " outside declared range [0, " +
                      std::to_string(schema.num_classes) + ")");
    }
    if (schema.num_groups > 0 && s.group >= schema.num_groups) {
      throw DataError("row " + std::to_string(row) + ": group " +
                      std::to_string(s.group) + " outside declared range [0, " +
                      std::to_string(schema.num_groups) + ")");
    }
    if (split_col) {
      try {
        splits.push_back(parse_split(cells[*split_col]));
      } catch (const DataError& e) {
        throw DataError("row " + std::to_string(row) + ", column '" +
                        schema.split_column + "': " + e.what());
      }
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw DataError("csv: no data rows");

  int num_classes = schema.num_classes;
  int num_groups = schema.num_groups;
  if (num_classes == 0 || num_groups == 0) {
    int max_label = 0, max_group = 0;
    for (const auto& s : samples) {
      max_label = std::max(max_label, s.label);
      max_group = std::max(max_group, s.group);
    }
    if (num_classes == 0) num_classes = max_label + 1;
    if (num_groups == 0) num_groups = max_group + 1;
  }

  if (!split_col) {
    std::vector<int> labels, groups;
    for (const auto& s : samples) {
      labels.push_back(s.label);
      groups.push_back(s.group);
    }
    splits = stratified_split(labels, groups, num_classes, schema.split_seed);
  }
  return Dataset(feature_cols.size(), num_classes, num_groups,
                 std::move(samples), std::move(splits));
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'f' << j << ',';
  out << "label,group,split\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features(i)) {
      format_double(out, v);
      out << ',';
    }
    out << dataset.label(i) << ',' << dataset.group(i) << ','
        << split_name(dataset.split(i)) << '\n';
  }
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(dataset, out);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

GroupStats group_stats(std::span<const int> groups, int num_groups) {
  if (groups.empty()) throw DataError("group_stats: empty split");
  GroupStats stats;
  stats.counts.assign(static_cast<std::size_t>(num_groups), 0);
  for (int g : groups) {
    if (g < 0 || g >= num_groups) throw DataError("group_stats: group out of range");
    ++stats.counts[static_cast<std::size_t>(g)];
  }
  stats.total = groups.size();
  stats.proportions.reserve(stats.counts.size());
  for (std::size_t n : stats.counts) {
    stats.proportions.push_back(double(n) / double(stats.total));
    if (n == 0) stats.missing_group = true;
  }
  return stats;
}

GroupStats group_stats(const Dataset& dataset, Split split) {
  std::vector<int> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.split(i) == split) groups.push_back(dataset.group(i));
  }
  if (groups.empty()) {
    throw DataError("group_stats: split '" + std::string(split_name(split)) +
                    "' is empty");
  }
  return group_stats(groups, dataset.num_groups());
}

}  // namespace fairsde
