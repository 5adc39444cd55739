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

#include "fairsde/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairsde {

std::string metric_name(MetricKind kind) {
  return kind == MetricKind::kAuc ? "auc" : "accuracy";
}

MetricKind parse_metric(const std::string& name) {
  if (name == "accuracy") return MetricKind::kAccuracy;
  if (name == "auc") return MetricKind::kAuc;
  throw std::invalid_argument("unknown metric kind '" + name + "'");
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw std::invalid_argument("accuracy: empty input");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return double(hit) / double(labels.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: length mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // twice_u = sum over positives of 2 * (#negatives below) + (#negatives tied).
  std::uint64_t positives = 0, negatives = 0, twice_u = 0, neg_below = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::uint64_t pos_tied = 0, neg_tied = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      const int y = labels[order[end]];
      if (y != 0 && y != 1) throw std::invalid_argument("auc: labels must be 0/1");
      (y == 1 ? pos_tied : neg_tied) += 1;
      ++end;
    }
    twice_u += pos_tied * (2 * neg_below + neg_tied);
    neg_below += neg_tied;
    positives += pos_tied;
    negatives += neg_tied;
    start = end;
  }
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("auc: undefined without both classes present");
  }
  return double(twice_u) / double(2 * positives * negatives);
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const auto row = logits.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<double> positive_scores(const Matrix& logits) {
  if (logits.cols != 2) {
    throw std::invalid_argument("AUC requires a binary task (2 logits per row)");
  }
  std::vector<double> out(logits.rows);
  for (std::size_t r = 0; r < logits.rows; ++r) out[r] = logits(r, 1) - logits(r, 0);
  return out;
}

GroupMetrics group_eval(const Matrix& logits, std::span<const int> labels,
                        std::span<const int> groups, int num_groups,
                        MetricKind kind, Split split) {
  if (labels.size() != logits.rows || groups.size() != logits.rows) {
    throw std::invalid_argument("group_eval: size mismatch");
  }
  const GroupStats stats = group_stats(groups, num_groups);
  GroupMetrics gm{kind, {}, stats.proportions, split};
  const std::vector<int> pred = argmax_rows(logits);
  std::vector<double> scores;
  if (kind == MetricKind::kAuc) scores = positive_scores(logits);

  std::vector<int> gp, gl;
  std::vector<double> gs;
  for (int a = 0; a < num_groups; ++a) {
    gp.clear();
    gl.clear();
    gs.clear();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (groups[i] != a) continue;
      gp.push_back(pred[i]);
      gl.push_back(labels[i]);
      if (kind == MetricKind::kAuc) gs.push_back(scores[i]);
    }
    if (gl.empty()) {
      throw std::invalid_argument("group_eval: group " + std::to_string(a) +
                                  " is absent from the " +
                                  std::string(split_name(split)) + " split");
    }
    if (kind == MetricKind::kAccuracy) {
      gm.values.push_back(accuracy(gp, gl));
    } else {
      try {
        gm.values.push_back(auc(gs, gl));
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument("group_eval: group " + std::to_string(a) +
                                    " lacks one of the two classes; AUC undefined");
      }
    }
  }
  return gm;
}

GroupMetrics group_eval(const Scorer& scorer, const Dataset& dataset, Split split,
                        MetricKind kind) {
  const auto view = dataset.view(split);
  if (view.labels.empty()) {
    throw DataError("group_eval: split '" + std::string(split_name(split)) +
                    "' is empty");
  }
  return group_eval(scorer(view.x, view.groups), view.labels, view.groups,
                    dataset.num_groups(), kind, split);
}

double max_min(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("max_min: no groups");
  return *std::min_element(values.begin(), values.end());
}

double gap(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("gap: needs at least two groups");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double max_min(const GroupMetrics& gm) { return max_min(gm.values); }
double gap(const GroupMetrics& gm) { return gap(gm.values); }

double equalized_odds(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> groups, int num_groups) {
  if (predictions.size() != labels.size() || groups.size() != labels.size()) {
    throw std::invalid_argument("equalized_odds: length mismatch");
  }
  if (num_groups < 2) throw std::invalid_argument("equalized_odds: needs two groups");
  const auto G = static_cast<std::size_t>(num_groups);
  // counts[a][y] and positives[a][y] = #{pred == 1}.
  std::vector<std::array<std::size_t, 2>> counts(G, {0, 0}), positives(G, {0, 0});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
      throw std::invalid_argument("equalized_odds: labels and predictions must be 0/1");
    }
    const int a = groups[i];
    if (a < 0 || a >= num_groups) throw std::invalid_argument("equalized_odds: bad group");
    ++counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(y)];
    if (p == 1) ++positives[static_cast<std::size_t>(a)][static_cast<std::size_t>(y)];
  }
  std::vector<std::array<double, 2>> rate(G);
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t y = 0; y < 2; ++y) {
      if (counts[a][y] == 0) {
        throw std::invalid_argument("equalized_odds: group " + std::to_string(a) +
                                    " has no samples of class " + std::to_string(y));
      }
      rate[a][y] = double(positives[a][y]) / double(counts[a][y]);
    }
  }
  double worst = 1.0;
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t b = a + 1; b < G; ++b) {
      const double score = 1.0 - 0.5 * (std::abs(rate[a][0] - rate[b][0]) +
                                        std::abs(rate[a][1] - rate[b][1]));
      worst = std::min(worst, score);
    }
  }
  return worst;
}

}  // namespace fairsde
