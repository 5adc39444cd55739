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

#ifndef FAIRSDE_METRICS_HPP_
#define FAIRSDE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsde/data.hpp"
#include "fairsde/matrix.hpp"
#include "fairsde/training.hpp"

namespace fairsde {

enum class MetricKind : std::uint8_t { kAccuracy, kAuc };

std::string metric_name(MetricKind kind);
MetricKind parse_metric(const std::string& name);

// Fraction of exact matches. Throws on empty or mismatched input.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Mann-Whitney AUC: probability that a random positive outscores a random
// negative, ties counted 1/2. Computed from integer half-counts, so it equals
// the pairwise-count estimator exactly. Throws when a class is missing.
double auc(std::span<const double> scores, std::span<const int> labels);

std::vector<int> argmax_rows(const Matrix& logits);

// Binary score used for AUC: logit of class 1 minus logit of class 0, which
// orders samples exactly as the softmax probability of class 1.
std::vector<double> positive_scores(const Matrix& logits);

struct GroupMetrics {
  MetricKind kind = MetricKind::kAccuracy;
  std::vector<double> values;
  std::vector<double> proportions;
  Split split = Split::kVal;

  std::size_t num_groups() const { return values.size(); }
};

GroupMetrics group_eval(const Matrix& logits, std::span<const int> labels,
                        std::span<const int> groups, int num_groups,
                        MetricKind kind, Split split);
GroupMetrics group_eval(const Scorer& scorer, const Dataset& dataset, Split split,
                        MetricKind kind);

double max_min(std::span<const double> values);
double gap(std::span<const double> values);
double max_min(const GroupMetrics& gm);
double gap(const GroupMetrics& gm);

// 1 - (|TPR_0 - TPR_1| + |FPR_0 - FPR_1|) / 2 for two groups; the minimum of
// that score over all group pairs when there are more.
double equalized_odds(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> groups, int num_groups);

}  // namespace fairsde

#endif  // FAIRSDE_METRICS_HPP_
