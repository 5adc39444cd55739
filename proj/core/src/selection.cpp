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

#include "fairsde/selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace fairsde {
namespace {

void check_compatible(const GroupMetrics& expert, const GroupMetrics& erm) {
  if (expert.values.size() != erm.values.size()) {
    throw std::invalid_argument("selection: expert covers " +
                                std::to_string(expert.values.size()) +
                                " groups, ERM covers " +
                                std::to_string(erm.values.size()));
  }
  if (expert.values.empty()) throw std::invalid_argument("selection: no groups");
  if (expert.kind != erm.kind) {
    throw std::invalid_argument("selection: metric kinds differ");
  }
  if (expert.split != erm.split) {
    throw std::invalid_argument("selection: metrics come from different splits");
  }
  if (erm.proportions.size() != erm.values.size()) {
    throw std::invalid_argument("selection: proportions do not match groups");
  }
}

double spread(std::span<const double> alpha) {
  if (alpha.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(alpha.begin(), alpha.end());
  return *hi - *lo;
}

// Strict "a is preferred over b" for two candidates with equal objective.
bool tie_break_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const auto count = [](std::span<const std::uint8_t> v) {
    return std::count(v.begin(), v.end(), std::uint8_t{1});
  };
  const auto ca = count(a), cb = count(b);
  if (ca != cb) return ca < cb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Incumbent {
  std::vector<std::uint8_t> v;
  double objective = std::numeric_limits<double>::infinity();

  void offer(std::span<const std::uint8_t> candidate, double obj) {
    if (obj < objective || (obj == objective && tie_break_less(candidate, v))) {
      v.assign(candidate.begin(), candidate.end());
      objective = obj;
    }
  }
};

Incumbent solve_enumerate(const GroupMetrics& expert, const GroupMetrics& erm,
                          double lambda) {
  const std::size_t G = erm.values.size();
  if (G > 62) throw std::invalid_argument("select_ip: too many groups to enumerate");
  Incumbent best;
  std::vector<std::uint8_t> v(G);
  const std::uint64_t total = std::uint64_t{1} << G;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    bool feasible = true;
    for (std::size_t a = 0; a < G; ++a) {
      v[a] = static_cast<std::uint8_t>((mask >> a) & 1U);
      if (v[a] && expert.values[a] < erm.values[a]) feasible = false;
    }
    if (!feasible) continue;
    const auto alpha = combine(v, expert, erm);
    best.offer(v, ip_objective(alpha, erm.proportions, lambda));
  }
  return best;
}

// Depth-first over groups in index order, v_a = 0 before v_a = 1. A node's
// bound is the spread of the alphas fixed so far (spread only grows) minus
// lambda times the best reachable accuracy term.
class BranchAndBound {
 public:
  BranchAndBound(const GroupMetrics& expert, const GroupMetrics& erm, double lambda)
      : expert_(expert), erm_(erm), lambda_(lambda), G_(erm.values.size()),
        v_(G_, 0), alpha_(G_, 0.0), suffix_best_(G_ + 1, 0.0) {
    for (std::size_t a = G_; a-- > 0;) {
      suffix_best_[a] = suffix_best_[a + 1] +
                        erm.proportions[a] * std::max(erm.values[a], expert.values[a]);
    }
  }

  Incumbent solve() {
    descend(0, std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), 0.0);
    return best_;
  }

 private:
  void descend(std::size_t a, double lo, double hi, double weighted) {
    if (a == G_) {
      best_.offer(v_, ip_objective(alpha_, erm_.proportions, lambda_));
      return;
    }
    const double spread_lb = hi >= lo ? hi - lo : 0.0;
    const double bound = spread_lb - lambda_ * (weighted + suffix_best_[a]);
    // Slack keeps rounding in the bound from discarding an exact tie.
    if (bound > best_.objective + 1e-9) return;
    for (std::uint8_t choice : {std::uint8_t{0}, std::uint8_t{1}}) {
      if (choice == 1 && expert_.values[a] < erm_.values[a]) continue;
      const double value = choice ? expert_.values[a] : erm_.values[a];
      v_[a] = choice;
      alpha_[a] = value;
      descend(a + 1, std::min(lo, value), std::max(hi, value),
              weighted + erm_.proportions[a] * value);
    }
    v_[a] = 0;
  }

  const GroupMetrics& expert_;
  const GroupMetrics& erm_;
  double lambda_;
  std::size_t G_;
  std::vector<std::uint8_t> v_;
  std::vector<double> alpha_;
  std::vector<double> suffix_best_;
  Incumbent best_;
};

}  // namespace

std::string strategy_name(Strategy s) { return s == Strategy::kIp ? "ip" : "greedy"; }

Strategy parse_strategy(const std::string& name) {
  if (name == "greedy" || name == "gs") return Strategy::kGreedy;
  if (name == "ip") return Strategy::kIp;
  throw std::invalid_argument("unknown selection strategy '" + name + "'");
}

std::size_t SelectionDecision::experts_used() const {
  return static_cast<std::size_t>(
      std::count(use_expert.begin(), use_expert.end(), std::uint8_t{1}));
}

std::vector<double> combine(std::span<const std::uint8_t> use_expert,
                            const GroupMetrics& expert, const GroupMetrics& erm) {
  if (expert.values.size() != erm.values.size() ||
      use_expert.size() != erm.values.size()) {
    throw std::invalid_argument("combine: group count mismatch");
  }
  std::vector<double> alpha(erm.values.size());
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    alpha[a] = use_expert[a] ? expert.values[a] : erm.values[a];
  }
  return alpha;
}

double ip_objective(std::span<const double> alpha, std::span<const double> proportions,
                    double lambda) {
  double weighted = 0.0;
  for (std::size_t a = 0; a < alpha.size(); ++a) weighted += proportions[a] * alpha[a];
  return spread(alpha) - lambda * weighted;
}

SelectionDecision select_greedy(const GroupMetrics& expert, const GroupMetrics& erm) {
  check_compatible(expert, erm);
  SelectionDecision d;
  d.strategy = Strategy::kGreedy;
  d.use_expert.resize(erm.values.size());
  for (std::size_t a = 0; a < erm.values.size(); ++a) {
    d.use_expert[a] = expert.values[a] > erm.values[a] ? 1 : 0;
  }
  d.alpha = combine(d.use_expert, expert, erm);
  d.delta = spread(d.alpha);
  d.objective = *std::min_element(d.alpha.begin(), d.alpha.end());
  return d;
}

SelectionDecision select_ip(const GroupMetrics& expert, const GroupMetrics& erm,
                            double lambda, IpSolver solver) {
  check_compatible(expert, erm);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("select_ip: lambda must be a finite value >= 0");
  }
  if (solver == IpSolver::kAuto) {
    solver = erm.values.size() <= kMaxEnumerationGroups ? IpSolver::kEnumerate
                                                        : IpSolver::kBranchAndBound;
  }
  const Incumbent best = solver == IpSolver::kEnumerate
                             ? solve_enumerate(expert, erm, lambda)
                             : BranchAndBound(expert, erm, lambda).solve();
  SelectionDecision d;
  d.strategy = Strategy::kIp;
  d.lambda = lambda;
  d.use_expert = best.v;
  d.alpha = combine(d.use_expert, expert, erm);
  d.delta = spread(d.alpha);
  d.objective = best.objective;
  return d;
}

std::vector<double> route_predict(std::span<const double> x, int group,
                                  const SelectionDecision& decision,
                                  const FairSdeModel& fairsde, const ErmModel& erm) {
  if (group < 0 || static_cast<std::size_t>(group) >= decision.use_expert.size() ||
      static_cast<std::size_t>(group) >= fairsde.heads.size()) {
    throw std::invalid_argument("route_predict: unknown group " + std::to_string(group));
  }
  if (decision.use_expert[static_cast<std::size_t>(group)]) {
    return forward(fairsde.heads[static_cast<std::size_t>(group)],
                   forward(fairsde.backbone, x));
  }
  return forward(erm.head, forward(erm.backbone, x));
}

Scorer routed_scorer(const SelectionDecision& decision, const FairSdeModel& fairsde,
                     const ErmModel& erm) {
  return [decision, fairsde, erm](const Matrix& x, std::span<const int> groups) {
    if (groups.size() != x.rows) {
      throw std::invalid_argument("routed scorer: group count does not match rows");
    }
    Matrix out(x.rows, erm.head.output_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto scores = route_predict(x.row(i), groups[i], decision, fairsde, erm);
      std::copy(scores.begin(), scores.end(), out.row(i).begin());
    }
    return out;
  };
}

}  // namespace fairsde
