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

#ifndef FAIRSDE_REPORT_HPP_
#define FAIRSDE_REPORT_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "fairsde/metrics.hpp"
#include "fairsde/selection.hpp"

namespace fairsde {

struct MetricsReport {
  MetricKind kind = MetricKind::kAccuracy;
  Split split = Split::kVal;
  double overall = 0.0;  // pooled over the split, not a weighted group mean
  GroupMetrics per_group;
  double mf = 0.0;
  double gap = 0.0;  // zero for a single group
  // Binary tasks only, and only when every group holds both classes.
  std::optional<double> eo;
  bool eo_worst_pair = false;  // true when more than two groups were reduced
  std::optional<SelectionDecision> selection;
};

MetricsReport make_report(const Matrix& logits, std::span<const int> labels,
                          std::span<const int> groups, int num_groups,
                          MetricKind kind, Split split);
MetricsReport make_report(const Scorer& scorer, const Dataset& dataset, Split split,
                          MetricKind kind);

// JSON documents (pretty-printed, deterministic key order). Schemas are
// described in docs/formats.md.
std::string to_json(const MetricsReport& report);
std::string to_json(const GroupMetrics& gm);
std::string to_json(const SelectionDecision& decision);

// Accepts a GroupMetrics document or a MetricsReport (its per-group block).
GroupMetrics group_metrics_from_json(std::string_view text);
SelectionDecision selection_from_json(std::string_view text);

// Flat CSV row for sweep aggregation: metric_kind,split,overall,mf,gap,eo,
// then alpha_0..alpha_{G-1} and p_0..p_{G-1}.
std::string csv_header(std::size_t num_groups);
std::string csv_row(const MetricsReport& report);

}  // namespace fairsde

#endif  // FAIRSDE_REPORT_HPP_
