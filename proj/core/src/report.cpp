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

#include "fairsde/report.hpp"

#include <charconv>
#include <sstream>

#include "json_io.hpp"

namespace fairsde {

namespace json_io {

json encode(const GroupMetrics& gm) {
  return json{{"metric_kind", metric_name(gm.kind)},
              {"split", std::string(split_name(gm.split))},
              {"values", gm.values},
              {"proportions", gm.proportions}};
}

json encode(const SelectionDecision& d) {
  json j{{"strategy", strategy_name(d.strategy)},
         {"use_expert", d.use_expert},
         {"alpha", d.alpha},
         {"delta", d.delta},
         {"objective", d.objective}};
  if (d.strategy == Strategy::kIp) j["lambda"] = d.lambda;
  return j;
}

json encode(const MetricsReport& r) {
  json j{{"metric_kind", metric_name(r.kind)},
         {"split", std::string(split_name(r.split))},
         {"overall", r.overall},
         {"per_group", r.per_group.values},
         {"proportions", r.per_group.proportions},
         {"mf", r.mf},
         {"gap", r.gap},
         {"eo", r.eo ? json(*r.eo) : json(nullptr)},
         {"eo_worst_pair", r.eo_worst_pair},
         {"selection", r.selection ? encode(*r.selection) : json(nullptr)}};
  return j;
}

GroupMetrics group_metrics(const json& j) {
  GroupMetrics gm;
  gm.kind = parse_metric(j.at("metric_kind").get<std::string>());
  gm.split = parse_split(j.at("split").get<std::string>());
  gm.values = j.at("values").get<std::vector<double>>();
  gm.proportions = j.at("proportions").get<std::vector<double>>();
  if (gm.values.size() != gm.proportions.size()) {
    throw DataError("group metrics: values and proportions differ in length");
  }
  return gm;
}

SelectionDecision selection(const json& j) {
  SelectionDecision d;
  d.strategy = parse_strategy(j.at("strategy").get<std::string>());
  d.use_expert = j.at("use_expert").get<std::vector<std::uint8_t>>();
  d.alpha = j.at("alpha").get<std::vector<double>>();
  d.delta = j.at("delta").get<double>();
  d.objective = j.at("objective").get<double>();
  d.lambda = j.value("lambda", 0.0);
  return d;
}

}  // namespace json_io

MetricsReport make_report(const Matrix& logits, std::span<const int> labels,
                          std::span<const int> groups, int num_groups,
                          MetricKind kind, Split split) {
  MetricsReport r;
  r.kind = kind;
  r.split = split;
  r.per_group = group_eval(logits, labels, groups, num_groups, kind, split);
  r.overall = kind == MetricKind::kAccuracy ? accuracy(argmax_rows(logits), labels)
                                            : auc(positive_scores(logits), labels);
  r.mf = max_min(r.per_group);
  r.gap = num_groups >= 2 ? gap(r.per_group) : 0.0;
  if (logits.cols == 2 && num_groups >= 2) {
    try {
      r.eo = equalized_odds(argmax_rows(logits), labels, groups, num_groups);
      r.eo_worst_pair = num_groups > 2;
    } catch (const std::invalid_argument&) {
      r.eo.reset();  // some group lacks a class
    }
  }
  return r;
}

MetricsReport make_report(const Scorer& scorer, const Dataset& dataset, Split split,
                          MetricKind kind) {
  const auto view = dataset.view(split);
  if (view.labels.empty()) {
    throw DataError("report: split '" + std::string(split_name(split)) + "' is empty");
  }
  return make_report(scorer(view.x, view.groups), view.labels, view.groups,
                     dataset.num_groups(), kind, split);
}

std::string to_json(const MetricsReport& report) {
  return json_io::encode(report).dump(2);
}
std::string to_json(const GroupMetrics& gm) { return json_io::encode(gm).dump(2); }
std::string to_json(const SelectionDecision& decision) {
  return json_io::encode(decision).dump(2);
}

GroupMetrics group_metrics_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.is_object() && !j.contains("values") && j.contains("per_group")) {
      // A full MetricsReport; take its per-group block.
      return json_io::group_metrics({{"metric_kind", j.at("metric_kind")},
                                     {"split", j.at("split")},
                                     {"values", j.at("per_group")},
                                     {"proportions", j.at("proportions")}});
    }
    return json_io::group_metrics(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("group metrics JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("group metrics JSON: ") + e.what());
  }
}

SelectionDecision selection_from_json(std::string_view text) {
  try {
    return json_io::selection(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("selection JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("selection JSON: ") + e.what());
  }
}

namespace {

void put(std::ostringstream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

std::string csv_header(std::size_t num_groups) {
  std::string h = "metric_kind,split,overall,mf,gap,eo";
  for (std::size_t a = 0; a < num_groups; ++a) h += ",alpha_" + std::to_string(a);
  for (std::size_t a = 0; a < num_groups; ++a) h += ",p_" + std::to_string(a);
  return h;
}

std::string csv_row(const MetricsReport& report) {
  std::ostringstream out;
  out << metric_name(report.kind) << ',' << split_name(report.split) << ',';
  put(out, report.overall);
  out << ',';
  put(out, report.mf);
  out << ',';
  put(out, report.gap);
  out << ',';
  if (report.eo) put(out, *report.eo);
  for (double v : report.per_group.values) {
    out << ',';
    put(out, v);
  }
  for (double p : report.per_group.proportions) {
    out << ',';
    put(out, p);
  }
  return out.str();
}

}  // namespace fairsde
