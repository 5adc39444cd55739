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

// Randomized invariants. Every loop is seeded so failures reproduce.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairsde/data.hpp"
#include "fairsde/experiment.hpp"
#include "fairsde/losses.hpp"
#include "fairsde/metrics.hpp"
#include "fairsde/net.hpp"
#include "fairsde/selection.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fairsde {
namespace {

using testing::random_ints;
using testing::random_matrix;

GroupMetrics random_metrics(std::size_t G, Rng& rng, bool coarse) {
  GroupMetrics gm;
  for (std::size_t a = 0; a < G; ++a) {
    // Coarse grids produce ties, which exercise the tie-break rules.
    gm.values.push_back(coarse ? double(rng.below(5)) / 4.0 : rng.uniform(0.5, 1.0));
  }
  gm.proportions.resize(G);
  double total = 0.0;
  for (double& p : gm.proportions) total += (p = rng.uniform(0.05, 1.0));
  for (double& p : gm.proportions) p /= total;
  return gm;
}

std::vector<std::uint8_t> bits(std::uint64_t mask, std::size_t G) {
  std::vector<std::uint8_t> v(G);
  for (std::size_t a = 0; a < G; ++a) v[a] = (mask >> a) & 1u;
  return v;
}

TEST(Property, GreedyMaximisesWorstGroupOverAllSelections) {
  Rng rng(101);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t G = 1 + rng.below(6);
    const bool coarse = t % 2 == 0;
    const GroupMetrics expert = random_metrics(G, rng, coarse);
    GroupMetrics erm = random_metrics(G, rng, coarse);
    erm.proportions = expert.proportions;
    const auto d = select_greedy(expert, erm);
    const double got = *std::min_element(d.alpha.begin(), d.alpha.end());
    for (std::uint64_t mask = 0; mask < (1u << G); ++mask) {
      const auto alpha = combine(bits(mask, G), expert, erm);
      EXPECT_GE(got, *std::min_element(alpha.begin(), alpha.end())) << "instance " << t;
    }
  }
}

TEST(Property, SelectionsNeverHarmAnyGroup) {
  Rng rng(102);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t G = 1 + rng.below(6);
    const GroupMetrics expert = random_metrics(G, rng, t % 3 == 0);
    GroupMetrics erm = random_metrics(G, rng, t % 3 == 0);
    erm.proportions = expert.proportions;
    const double lambda = rng.uniform(0.0, 2.0);
    for (const auto& d : {select_greedy(expert, erm), select_ip(expert, erm, lambda)}) {
      for (std::size_t a = 0; a < G; ++a) EXPECT_GE(d.alpha[a], erm.values[a]);
    }
  }
}

TEST(Property, TrivialSelectionIsAlwaysFeasible) {
  Rng rng(103);
  for (int t = 0; t < 500; ++t) {
    const std::size_t G = 1 + rng.below(6);
    const GroupMetrics expert = random_metrics(G, rng, false);
    GroupMetrics erm = random_metrics(G, rng, false);
    erm.proportions = expert.proportions;
    const auto d = select_ip(expert, erm, 0.1);
    const double trivial = ip_objective(erm.values, erm.proportions, 0.1);
    EXPECT_LE(d.objective, trivial);
  }
}

TEST(Property, GroupStatsProportionsSumToOne) {
  Rng rng(104);
  for (int t = 0; t < 200; ++t) {
    const int G = 1 + int(rng.below(7));
    const auto groups = random_ints(1 + rng.below(300), G, rng);
    const auto s = group_stats(groups, G);
    const double sum = std::accumulate(s.proportions.begin(), s.proportions.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(s.total, groups.size());
  }
}

TEST(Property, SyntheticDatasetsRoundTripThroughCsv) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset ds = generate_synthetic(testing::small_config(seed, 20));
    std::stringstream buf;
    write_csv(ds, buf);
    const Dataset back = read_csv(buf);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ASSERT_TRUE(std::equal(ds.features(i).begin(), ds.features(i).end(),
                             back.features(i).begin()));
      EXPECT_EQ(back.split(i), ds.split(i));
    }
  }
}

TEST(Property, DiscLossIsNonNegativeAndZeroOnlyWhenExact) {
  Rng rng(105);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng.below(8), n = 1 + rng.below(16);
    const int G = 2 + int(rng.below(2));
    const std::array<std::size_t, 2> sizes = {m, std::size_t(G)};
    const std::array<Activation, 1> acts = {Activation::kIdentity};
    const Mlp disc = Mlp::kaiming(sizes, acts, rng);
    const Matrix z = random_matrix(n, m, rng, 2.0);
    const auto groups = random_ints(n, G, rng);
    const double loss = loss_disc(z, groups, disc).loss;
    EXPECT_GE(loss, 0.0);
    // Finite logits never put all mass on one group.
    EXPECT_GT(loss, 0.0);
  }
}

TEST(Property, VirtLossIsNonNegativeAndScaleInvariant) {
  Rng rng(106);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + rng.below(7), n = 1 + rng.below(16);
    const int G = 1 + int(rng.below(3)), C = 1 + int(rng.below(3));
    const auto centers = VirtualCenters::kaiming(G, C, m, rng);
    const Matrix z = random_matrix(n, m, rng);
    const auto labels = random_ints(n, C, rng);
    const auto groups = random_ints(n, G, rng);
    const auto scope = t % 2 ? VirtScope::kOwnGroup : VirtScope::kAllGroups;
    const double base = loss_virt(z, labels, groups, centers, scope).loss;
    EXPECT_GE(base, 0.0);
    Matrix scaled = z;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = rng.uniform(0.1, 10.0);
      for (double& v : scaled.row(i)) v *= s;
    }
    EXPECT_NEAR(loss_virt(scaled, labels, groups, centers, scope).loss, base, 1e-12);
  }
}

TEST(Property, SampledPairsAreAlwaysEligible) {
  Rng rng(107);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(16);
    const auto labels = random_ints(n, 1 + int(rng.below(3)), rng);
    const auto groups = random_ints(n, 1 + int(rng.below(3)), rng);
    const auto rule = t % 2 ? NegativeRule::kClassOrGroup : NegativeRule::kClassAndGroup;
    const auto pairs = sample_pairs(labels, groups, rng, rule);
    EXPECT_TRUE(is_valid_assignment(pairs, labels, groups, rule));
    // A partner is missing only when nobody is eligible.
    for (std::size_t i = 0; i < n; ++i) {
      bool any_pos = false, any_neg = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        any_pos |= labels[j] == labels[i] && groups[j] == groups[i];
        const bool dy = labels[j] != labels[i], da = groups[j] != groups[i];
        any_neg |= rule == NegativeRule::kClassAndGroup ? (dy && da) : (dy || da);
      }
      EXPECT_EQ(pairs.positive[i].has_value(), any_pos);
      EXPECT_EQ(pairs.negative[i].has_value(), any_neg);
    }
  }
}

TEST(Property, EqualizedOddsIsBoundedAndSymmetric) {
  Rng rng(108);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 8 + rng.below(40);
    auto labels = random_ints(n, 2, rng);
    auto groups = random_ints(n, 2, rng);
    // Make sure every group has both classes.
    labels[0] = 0, labels[1] = 1, labels[2] = 0, labels[3] = 1;
    groups[0] = groups[1] = 0;
    groups[2] = groups[3] = 1;
    const auto pred = random_ints(n, 2, rng);
    const double eo = equalized_odds(pred, labels, groups, 2);
    EXPECT_GE(eo, 0.0);
    EXPECT_LE(eo, 1.0);
    std::vector<int> swapped(groups);
    for (int& g : swapped) g = 1 - g;
    EXPECT_EQ(equalized_odds(pred, labels, swapped, 2), eo);
  }
}

TEST(Property, SgdWithZeroLearningRateIsIdentity) {
  Rng rng(109);
  for (int t = 0; t < 50; ++t) {
    const std::array<std::size_t, 3> sizes = {1 + rng.below(5), 1 + rng.below(5),
                                              1 + rng.below(5)};
    const std::array<Activation, 2> acts = {Activation::kRelu, Activation::kIdentity};
    Mlp net = Mlp::kaiming(sizes, acts, rng);
    const Mlp before = net;
    auto state = TrainState::for_net(net, 0.0, 0.9, 0.9);
    auto grads = MlpGradients::zeros_like(net);
    for (std::size_t k = 0; k < grads.size(); ++k) grads.flat(k) = rng.uniform(-5, 5);
    for (int step = 0; step < 3; ++step) sgd_step(net, state, grads);
    EXPECT_EQ(net, before);
  }
}

TEST(Property, ReportRegeneratesFromEmbeddedConfig) {
  auto cfg = parse_config_string(
      "version = 1\ndata.n_train = 400\nhp.epochs = 2\nprobe.epochs = 3\nseeds = 5\n");
  const auto first = run_experiment(cfg);
  const std::string report = seed_report_json(first.seeds[0], cfg);
  const auto embedded = parse_config_string(
      nlohmann::json::parse(report).at("config").get<std::string>());
  const auto again = run_experiment(embedded);
  EXPECT_EQ(seed_report_json(again.seeds[0], embedded), report);
}

}  // namespace
}  // namespace fairsde
