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

#include <benchmark/benchmark.h>

#include <array>

#include "fairsde/losses.hpp"
#include "fairsde/metrics.hpp"
#include "fairsde/net.hpp"
#include "fairsde/rng.hpp"
#include "fairsde/selection.hpp"

namespace {

using namespace fairsde;

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

// Default desk-scale backbone: 10 -> 32 (relu) -> 8.
Mlp backbone(Rng& rng) {
  const std::array<std::size_t, 3> sizes = {10, 32, 8};
  const std::array<Activation, 2> acts = {Activation::kRelu, Activation::kIdentity};
  return Mlp::kaiming(sizes, acts, rng);
}

void BM_BackboneForwardBackward(benchmark::State& state) {
  Rng rng(1);
  const Mlp net = backbone(rng);
  const Matrix x = random_matrix(std::size_t(state.range(0)), 10, rng);
  const Matrix g = random_matrix(x.rows, 8, rng);
  for (auto _ : state) {
    const auto pass = forward(net, x);
    benchmark::DoNotOptimize(backward(net, pass, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BackboneForwardBackward)->Arg(64)->Arg(256);

struct Batch {
  Matrix z;
  std::vector<int> labels, groups;
  VirtualCenters centers;
  PairAssignment pairs;
};

Batch batch(std::size_t n) {
  Rng rng(2);
  Batch b;
  b.z = random_matrix(n, 8, rng);
  b.labels = random_ints(n, 2, rng);
  b.groups = random_ints(n, 2, rng);
  b.centers = VirtualCenters::kaiming(2, 2, 8, rng);
  b.pairs = sample_pairs(b.labels, b.groups, rng);
  return b;
}

void BM_LossVirt(benchmark::State& state) {
  const Batch b = batch(std::size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_virt(b.z, b.labels, b.groups, b.centers));
  }
}
BENCHMARK(BM_LossVirt)->Arg(64);

void BM_LossDiv(benchmark::State& state) {
  const Batch b = batch(std::size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_div(b.z, b.labels, b.groups, b.pairs, b.centers));
  }
}
BENCHMARK(BM_LossDiv)->Arg(64);

void BM_SamplePairs(benchmark::State& state) {
  const Batch b = batch(std::size_t(state.range(0)));
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_pairs(b.labels, b.groups, rng));
}
BENCHMARK(BM_SamplePairs)->Arg(64);

void BM_Auc(benchmark::State& state) {
  Rng rng(4);
  const std::size_t n = std::size_t(state.range(0));
  std::vector<double> scores(n);
  for (double& s : scores) s = rng.normal();
  const auto labels = random_ints(n, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

GroupMetrics random_metrics(Rng& rng, std::size_t G) {
  GroupMetrics gm;
  for (std::size_t a = 0; a < G; ++a) {
    gm.values.push_back(rng.uniform(0.5, 1.0));
    gm.proportions.push_back(1.0 / double(G));
  }
  return gm;
}

void BM_SelectIp(benchmark::State& state) {
  Rng rng(5);
  const std::size_t G = std::size_t(state.range(0));
  const GroupMetrics expert = random_metrics(rng, G);
  const GroupMetrics erm = random_metrics(rng, G);
  const auto solver = state.range(1) ? IpSolver::kBranchAndBound : IpSolver::kEnumerate;
  for (auto _ : state) benchmark::DoNotOptimize(select_ip(expert, erm, 0.1, solver));
}
BENCHMARK(BM_SelectIp)->Args({6, 0})->Args({16, 0})->Args({16, 1})->Args({24, 1});

}  // namespace

BENCHMARK_MAIN();
