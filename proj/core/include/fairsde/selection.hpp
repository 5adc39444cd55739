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

#ifndef FAIRSDE_SELECTION_HPP_
#define FAIRSDE_SELECTION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsde/metrics.hpp"
#include "fairsde/training.hpp"

namespace fairsde {

enum class Strategy : std::uint8_t { kGreedy, kIp };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

// Per-group choice between the demographic expert (1) and the pooled ERM
// model (0), with the per-group metric it induces.
struct SelectionDecision {
  Strategy strategy = Strategy::kGreedy;
  std::vector<std::uint8_t> use_expert;
  std::vector<double> alpha;
  double delta = 0.0;  // max_{i,j} alpha_i - alpha_j
  // kIp: delta - lambda * sum_a p_a alpha_a. kGreedy: min_a alpha_a.
  double objective = 0.0;
  double lambda = 0.0;  // only meaningful for kIp

  std::size_t experts_used() const;
  bool trivial() const { return experts_used() == 0; }
};

// alpha_a = v_a * expert_a + (1 - v_a) * erm_a.
std::vector<double> combine(std::span<const std::uint8_t> use_expert,
                            const GroupMetrics& expert, const GroupMetrics& erm);

// Expert wherever it is strictly better; ties stay with ERM.
SelectionDecision select_greedy(const GroupMetrics& expert, const GroupMetrics& erm);

enum class IpSolver : std::uint8_t {
  kAuto,            // enumeration up to kMaxEnumerationGroups, else branch and bound
  kEnumerate,
  kBranchAndBound,
};

inline constexpr std::size_t kMaxEnumerationGroups = 20;
inline constexpr double kDefaultSelectionLambda = 0.1;

// Delta - lambda * sum_a p_a alpha_a, with Delta the largest pairwise
// difference of alpha (zero for a single group).
double ip_objective(std::span<const double> alpha, std::span<const double> proportions,
                    double lambda);

// Exact minimizer of ip_objective over v in {0,1}^G subject to
// alpha_a >= erm_a for every group. Ties prefer fewer experts, then the
// lexicographically smallest v. Proportions come from `erm`.
SelectionDecision select_ip(const GroupMetrics& expert, const GroupMetrics& erm,
                            double lambda = kDefaultSelectionLambda,
                            IpSolver solver = IpSolver::kAuto);

// h_a(f(x)) when group a uses its expert, h_erm(f_erm(x)) otherwise.
std::vector<double> route_predict(std::span<const double> x, int group,
                                  const SelectionDecision& decision,
                                  const FairSdeModel& fairsde, const ErmModel& erm);

Scorer routed_scorer(const SelectionDecision& decision, const FairSdeModel& fairsde,
                     const ErmModel& erm);

}  // namespace fairsde

#endif  // FAIRSDE_SELECTION_HPP_
