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

// Acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   fairsde_acceptance [config]
//
// The config defaults to configs/minority_shift.conf in the source tree.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iterator>
#include <string>
#include <vector>

#include "fairsde/experiment.hpp"
#include "fairsde/losses.hpp"
#include "fairsde/metrics.hpp"
#include "fairsde/net.hpp"
#include "fairsde/rng.hpp"
#include "fairsde/selection.hpp"

namespace {

using namespace fairsde;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and thresholds.
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kClosedFormTol = 1e-12;
constexpr double kObjectiveTol = 1e-12;
constexpr double kErmGapMin = 0.05;
constexpr double kProbeLiftMin = 0.05;
constexpr int kGradientInstances = 20;
constexpr int kOracleInstances = 1000;
constexpr double kGradientSeconds = 30.0;
constexpr double kIpSeconds = 10.0;
constexpr double kSuiteSeconds = 300.0;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string fmt_e(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<int> random_ints(std::size_t n, int bound, Rng& rng) {
  std::vector<int> out(n);
  for (int& v : out) v = int(rng.below(std::uint64_t(bound)));
  return out;
}

// Largest relative error between analytic entries and central differences
// of `loss` taken through the matching entries of `params`.
double worst_error(std::span<double> params, std::span<const double> analytic,
                   const std::function<double()>& loss) {
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + kFdStep;
    const double plus = loss();
    params[k] = saved - kFdStep;
    const double minus = loss();
    params[k] = saved;
    const double numeric = (plus - minus) / (2.0 * kFdStep);
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
  }
  return worst;
}

double worst_error(Mlp& net, const MlpGradients& grads, const std::function<double()>& loss) {
  double worst = 0.0;
  for (std::size_t k = 0; k < net.parameter_count(); ++k) {
    double& p = net.parameter(k);
    const double saved = p;
    p = saved + kFdStep;
    const double plus = loss();
    p = saved - kFdStep;
    const double minus = loss();
    p = saved;
    const double numeric = (plus - minus) / (2.0 * kFdStep);
    const double a = grads.flat(k);
    worst = std::max(worst, std::abs(a - numeric) /
                                std::max({std::abs(a), std::abs(numeric), 1e-6}));
  }
  return worst;
}

struct Instance {
  std::size_t m = 0, n = 0;
  int g = 0, c = 0;
  Matrix z;
  std::vector<int> labels, groups;
  VirtualCenters centers;
};

// m <= 8, G <= 3, C <= 3, batch <= 16.
Instance random_instance(Rng& rng, int min_classes = 1) {
  Instance in;
  in.m = 2 + rng.below(7);
  in.n = 2 + rng.below(15);
  in.g = 1 + int(rng.below(3));
  in.c = std::max(min_classes, 1 + int(rng.below(3)));
  in.z = random_matrix(in.n, in.m, rng);
  in.labels = random_ints(in.n, in.c, rng);
  in.groups = random_ints(in.n, in.g, rng);
  in.centers = VirtualCenters::kaiming(in.g, in.c, in.m, rng);
  return in;
}

Mlp linear(std::size_t in, std::size_t out, Rng& rng) {
  const std::size_t sizes[] = {in, out};
  const Activation acts[] = {Activation::kIdentity};
  Mlp net = Mlp::kaiming(sizes, acts, rng);
  for (double& b : net.layers()[0].bias) b = rng.uniform(-1, 1);
  return net;
}

void criterion_gradients() {
  const auto t0 = Clock::now();
  Rng rng(20261);
  double disc = 0.0, virt = 0.0, div = 0.0, ce = 0.0;
  for (int t = 0; t < kGradientInstances; ++t) {
    {
      Instance in = random_instance(rng);
      Mlp d = linear(in.m, std::size_t(std::max(in.g, 2)), rng);
      const auto r = loss_disc(in.z, in.groups, d);
      auto f = [&] { return loss_disc(in.z, in.groups, d).loss; };
      disc = std::max({disc, worst_error(in.z.data, r.z_grad.data, f),
                       worst_error(d, r.disc_grad, f)});
    }
    {
      Instance in = random_instance(rng);
      const auto r = loss_virt(in.z, in.labels, in.groups, in.centers);
      auto f = [&] { return loss_virt(in.z, in.labels, in.groups, in.centers).loss; };
      virt = std::max({virt, worst_error(in.z.data, r.z_grad.data, f),
                       worst_error(in.centers.values.data, r.center_grad.data, f)});
    }
    {
      Instance in = random_instance(rng);
      const auto pairs = sample_pairs(in.labels, in.groups, rng);
      const auto r = loss_div(in.z, in.labels, in.groups, pairs, in.centers);
      auto f = [&] { return loss_div(in.z, in.labels, in.groups, pairs, in.centers).loss; };
      div = std::max({div, worst_error(in.z.data, r.z_grad.data, f),
                      worst_error(in.centers.values.data, r.center_grad.data, f)});
    }
    {
      // Cross-entropy path: backbone forward, per-group heads, backward.
      Instance in = random_instance(rng, 2);
      const std::size_t d_in = 1 + rng.below(6);
      const Matrix x = random_matrix(in.n, d_in, rng);
      const std::size_t sizes[] = {d_in, 1 + rng.below(6), in.m};
      const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
      Mlp f_net = Mlp::kaiming(sizes, acts, rng);
      std::vector<Mlp> heads;
      for (int a = 0; a < in.g; ++a) heads.push_back(linear(in.m, std::size_t(in.c), rng));
      const auto pass = forward(f_net, x);
      const auto hl = loss_group_heads(pass.output, in.labels, in.groups, heads);
      const auto back = backward(f_net, pass, hl.z_grad);
      auto f = [&] {
        return loss_group_heads(predict(f_net, x), in.labels, in.groups, heads).loss;
      };
      ce = std::max(ce, worst_error(f_net, back.params, f));
      for (int a = 0; a < in.g; ++a) {
        ce = std::max(ce, worst_error(heads[std::size_t(a)], hl.head_grads[std::size_t(a)], f));
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = std::max({disc, virt, div, ce}) <= kFdRelTol && secs < kGradientSeconds;
  report(1, pass,
         "worst rel err disc " + fmt(disc, 8) + ", virt " + fmt(virt, 8) + ", div " +
             fmt(div, 8) + ", ce " + fmt(ce, 8) + " over " +
             std::to_string(kGradientInstances) + " instances each, " + fmt(secs, 2) + " s");
}

void criterion_closed_forms() {
  // One sample, binary groups, D identically zero.
  const std::size_t sizes[] = {3, 2};
  const Activation acts[] = {Activation::kIdentity};
  Rng rng(5);
  Mlp zero = Mlp::kaiming(sizes, acts, rng);
  for (std::size_t k = 0; k < zero.parameter_count(); ++k) zero.parameter(k) = 0.0;
  Matrix z(1, 3);
  z(0, 0) = 0.4, z(0, 1) = -1.0, z(0, 2) = 2.0;
  const std::vector<int> g1 = {1};
  const double disc = loss_disc(z, g1, zero).loss;

  // One class: every softmax over classes is a single term.
  const auto vc1 = VirtualCenters::kaiming(2, 1, 3, rng);
  const std::vector<int> y0 = {0};
  const double virt = loss_virt(z, y0, g1, vc1).loss;

  // Symmetric configuration: every representation lies on the axis
  // between V_{0,0} and V_{1,1}, and sample 0 sees equal dot products with
  // its positive and its negative partner.
  Matrix zs(3, 2);
  zs(0, 0) = 1.0, zs(1, 0) = 2.0, zs(2, 0) = 2.0;
  VirtualCenters vc;
  vc.num_groups = 2;
  vc.num_classes = 2;
  vc.values = Matrix(4, 2);
  vc.values.data = {1, 1, 3, 0, 0, 3, 1, -1};
  const std::vector<int> ys = {0, 0, 1}, gs = {0, 0, 1};
  PairAssignment pairs;
  pairs.positive = {1, std::nullopt, std::nullopt};
  pairs.negative = {2, std::nullopt, std::nullopt};
  const double div = loss_div(zs, ys, gs, pairs, vc).loss;

  const bool pass = std::abs(disc - std::log(2.0)) <= kClosedFormTol &&
                    std::abs(virt) <= kClosedFormTol && std::abs(div) <= kClosedFormTol;
  report(2, pass,
         "L_disc - ln2 = " + fmt_e(disc - std::log(2.0)) + ", L_virt(C=1) = " +
             fmt_e(virt) + ", L_div(symmetric) = " + fmt_e(div));
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  long long twice = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (y[i] == 1 ? pos : neg) += 1;
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] == 1) continue;
      twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return double(twice) / (2.0 * double(pos) * double(neg));
}

void criterion_auc() {
  Rng rng(20263);
  int mismatches = 0, not_invariant = 0, with_ties = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<int> y = random_ints(n, 2, rng);
    y[0] = 0, y[1] = 1;
    std::vector<double> s(n);
    const std::uint64_t levels = 1 + rng.below(10);
    for (double& v : s) v = double(rng.below(levels)) / double(levels) - 0.5;
    std::vector<double> sorted(s);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) ++with_ties;
    const double a = auc(s, y);
    if (a != auc_oracle(s, y)) ++mismatches;
    std::vector<double> tr(n);
    for (std::size_t i = 0; i < n; ++i) tr[i] = std::exp(2.0 * s[i]) + s[i] * s[i] * s[i];
    if (auc(tr, y) != a) ++not_invariant;
  }
  report(3, mismatches == 0 && not_invariant == 0,
         std::to_string(mismatches) + " oracle mismatches, " + std::to_string(not_invariant) +
             " transform violations over " + std::to_string(kOracleInstances) +
             " instances (" + std::to_string(with_ties) + " with ties)");
}

GroupMetrics random_metrics(Rng& rng, std::size_t G, bool coarse) {
  GroupMetrics gm;
  for (std::size_t a = 0; a < G; ++a) {
    gm.values.push_back(coarse ? double(rng.below(5)) / 4.0 : rng.uniform(0.5, 1.0));
  }
  double total = 0.0;
  for (std::size_t a = 0; a < G; ++a) {
    gm.proportions.push_back(rng.uniform(0.05, 1.0));
    total += gm.proportions.back();
  }
  for (double& p : gm.proportions) p /= total;
  return gm;
}

std::vector<std::uint8_t> mask_bits(std::uint64_t mask, std::size_t G) {
  std::vector<std::uint8_t> v(G);
  for (std::size_t a = 0; a < G; ++a) v[a] = (mask >> a) & 1U;
  return v;
}

double spread(const std::vector<double>& alpha) {
  const auto [lo, hi] = std::minmax_element(alpha.begin(), alpha.end());
  return *hi - *lo;
}

void criterion_ip() {
  const auto t0 = Clock::now();
  Rng rng(20264);
  int wrong_v = 0, wrong_obj = 0, trivial_bad = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const std::size_t G = 1 + rng.below(6);
    const bool coarse = t % 2 == 0;
    const GroupMetrics expert = random_metrics(rng, G, coarse);
    GroupMetrics erm = random_metrics(rng, G, coarse);
    erm.proportions = expert.proportions;
    const double lambda = rng.below(2) ? rng.uniform(0.0, 2.0) : kDefaultSelectionLambda;

    // Enumeration with the documented tie-break.
    std::vector<std::uint8_t> best_v;
    double best = 0.0;
    bool have = false, trivial_feasible = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << G); ++mask) {
      const auto v = mask_bits(mask, G);
      const auto alpha = combine(v, expert, erm);
      bool feasible = true;
      for (std::size_t a = 0; a < G; ++a) feasible = feasible && alpha[a] >= erm.values[a];
      if (!feasible) continue;
      if (mask == 0) trivial_feasible = spread(alpha) == spread(erm.values);
      double weighted = 0.0;
      for (std::size_t a = 0; a < G; ++a) weighted += erm.proportions[a] * alpha[a];
      const double obj = spread(alpha) - lambda * weighted;
      const auto used = std::count(v.begin(), v.end(), 1);
      const auto best_used = std::count(best_v.begin(), best_v.end(), 1);
      if (!have || obj < best ||
          (obj == best && (used < best_used || (used == best_used && v < best_v)))) {
        best_v = v;
        best = obj;
        have = true;
      }
    }
    const auto d = select_ip(expert, erm, lambda);
    if (d.use_expert != best_v) ++wrong_v;
    if (std::abs(d.objective - best) > kObjectiveTol) ++wrong_obj;
    if (!trivial_feasible) ++trivial_bad;
  }
  const double secs = seconds_since(t0);
  report(4, wrong_v == 0 && wrong_obj == 0 && trivial_bad == 0 && secs < kIpSeconds,
         std::to_string(wrong_v) + " decision and " + std::to_string(wrong_obj) +
             " objective mismatches, trivial infeasible on " + std::to_string(trivial_bad) +
             " of " + std::to_string(kOracleInstances) + ", " + fmt(secs, 2) + " s");
}

void criterion_greedy() {
  Rng rng(20266);
  int suboptimal = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const std::size_t G = 1 + rng.below(6);
    const bool coarse = t % 2 == 0;
    const GroupMetrics expert = random_metrics(rng, G, coarse);
    GroupMetrics erm = random_metrics(rng, G, coarse);
    erm.proportions = expert.proportions;
    const auto d = select_greedy(expert, erm);
    const double got = *std::min_element(d.alpha.begin(), d.alpha.end());
    double best = -1.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << G); ++mask) {
      const auto alpha = combine(mask_bits(mask, G), expert, erm);
      best = std::max(best, *std::min_element(alpha.begin(), alpha.end()));
    }
    if (got != best) ++suboptimal;
  }
  report(6, suboptimal == 0,
         std::to_string(suboptimal) + " suboptimal of " + std::to_string(kOracleInstances) +
             " instances");
}

// Counts groups whose routed validation metric falls below ERM's.
int harm_count(const ExperimentBundle& bundle) {
  int harmed = 0;
  for (const auto& s : bundle.seeds) {
    for (const auto& [strategy, reports] : s.routed_reports) {
      const auto& routed = reports.val.per_group.values;
      const auto& erm = s.erm_reports.val.per_group.values;
      for (std::size_t a = 0; a < routed.size(); ++a) harmed += routed[a] < erm[a] ? 1 : 0;
    }
  }
  return harmed;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string decision_string(const SelectionDecision& d) {
  std::string s = "[";
  for (std::size_t a = 0; a < d.use_expert.size(); ++a) {
    s += (a ? "," : "") + std::to_string(int(d.use_expert[a]));
  }
  return s + "]";
}

int run(const fs::path& config_path) {
  const auto suite_start = Clock::now();
  criterion_gradients();
  criterion_closed_forms();
  criterion_auc();
  criterion_ip();

  const ExperimentConfig cfg = load_config(config_path);
  const Dataset dataset = load_dataset(cfg);
  const ExperimentBundle main_run = run_experiment(cfg, dataset);

  ExperimentConfig ablation = cfg;
  ablation.hp.lambda_virt = 0.0;
  ablation.hp.lambda_div = 0.0;
  const ExperimentBundle ablation_run = run_experiment(ablation, dataset);

  // Criterion 10 reruns the whole configuration and compares every file.
  const fs::path tmp = fs::temp_directory_path() / "fairsde_acceptance";
  fs::remove_all(tmp);
  write_bundle(main_run, cfg, dataset, tmp / "a");
  write_bundle(run_experiment(cfg, dataset), cfg, dataset, tmp / "b");

  {
    const int harmed = harm_count(main_run) + harm_count(ablation_run);
    report(5, harmed == 0,
           std::to_string(harmed) + " (seed, strategy, group) validation regressions across " +
               std::to_string(main_run.seeds.size() + ablation_run.seeds.size()) +
               " seed runs");
  }
  criterion_greedy();

  {
    bool gap_ok = true, mf_ok = true, ip_ok = true;
    std::string detail;
    for (const auto& s : main_run.seeds) {
      const auto& erm = s.erm_reports.val;
      const auto gs = s.routed_reports.find(Strategy::kGreedy);
      const auto ip = s.routed_reports.find(Strategy::kIp);
      gap_ok = gap_ok && erm.gap >= kErmGapMin;
      mf_ok = mf_ok && gs != s.routed_reports.end() && gs->second.val.mf >= erm.mf;
      ip_ok = ip_ok && ip != s.routed_reports.end() && ip->second.val.gap <= erm.gap;
      detail += " seed " + std::to_string(s.seed) + ": erm gap " + fmt(erm.gap) + " mf " +
                fmt(erm.mf);
      if (gs != s.routed_reports.end()) detail += ", gs mf " + fmt(gs->second.val.mf);
      if (ip != s.routed_reports.end()) detail += ", ip gap " + fmt(ip->second.val.gap);
      detail += ";";
    }
    const double secs = seconds_since(suite_start);
    report(7, main_run.seeds.size() == 3 && gap_ok && mf_ok && ip_ok && secs < kSuiteSeconds,
           std::string("(a) ") + (gap_ok ? "ok" : "no") + " (b) " + (mf_ok ? "ok" : "no") +
               " (c) " + (ip_ok ? "ok" : "no") + ";" + detail + " suite " + fmt(secs, 1) +
               " s");
  }

  {
    double lift = 0.0;
    std::string detail;
    for (const auto& s : main_run.seeds) {
      lift += s.probe_accuracy_fairsde - s.probe_accuracy_erm;
      detail += " seed " + std::to_string(s.seed) + ": " + fmt(s.probe_accuracy_fairsde) +
                " vs " + fmt(s.probe_accuracy_erm) + ";";
    }
    lift /= double(main_run.seeds.size());
    report(8, lift >= kProbeLiftMin, "mean probe lift " + fmt(lift) + ";" + detail);
  }

  {
    // A seed counts when every configured strategy keeps ERM for all groups.
    int trivial_seeds = 0;
    std::string detail;
    for (const auto& s : ablation_run.seeds) {
      bool trivial = true;
      detail += " seed " + std::to_string(s.seed) + ":";
      for (const auto& [strategy, d] : s.decisions) {
        trivial = trivial && d.trivial();
        detail += " " + strategy_name(strategy) + " " + decision_string(d);
      }
      detail += ";";
      trivial_seeds += trivial ? 1 : 0;
    }
    report(9, trivial_seeds >= 2,
           "without V, v = 0 on " + std::to_string(trivial_seeds) + " of " +
               std::to_string(ablation_run.seeds.size()) + " seeds;" + detail);
  }

  {
    int compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(tmp / "a")) {
      ++compared;
      const fs::path other = tmp / "b" / entry.path().filename();
      if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
    }
    report(10, compared > 0 && differing == 0,
           std::to_string(differing) + " of " + std::to_string(compared) +
               " bundle files differ between two runs");
  }
  fs::remove_all(tmp);

  std::printf("acceptance: %d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(FAIRSDE_ACCEPTANCE_CONFIG);
  try {
    return run(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
