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

#ifndef FAIRSDE_LOSSES_HPP_
#define FAIRSDE_LOSSES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairsde/matrix.hpp"
#include "fairsde/net.hpp"
#include "fairsde/rng.hpp"

namespace fairsde {

// Learnable per-(group, class) center vectors, stored as rows
// [group * num_classes + class] of a (G*C) x m matrix.
struct VirtualCenters {
  int num_groups = 0;
  int num_classes = 0;
  Matrix values;

  std::size_t dim() const { return values.cols; }
  std::size_t index(int group, int label) const {
    return static_cast<std::size_t>(group * num_classes + label);
  }
  std::span<const double> center(int group, int label) const {
    return values.row(index(group, label));
  }
  std::span<double> center(int group, int label) {
    return values.row(index(group, label));
  }

  // Kaiming-uniform with fan-in m, the same scheme as the dense layers.
  static VirtualCenters kaiming(int num_groups, int num_classes, std::size_t dim,
                                Rng& rng);

  // Redraws every center whose norm fell below `min_norm`; returns how many
  // were redrawn.
  std::size_t reinitialize_degenerate(Rng& rng, double min_norm = 1e-8);

  friend bool operator==(const VirtualCenters&, const VirtualCenters&) = default;
};

// u.v / (|u| |v|). Throws std::domain_error when either norm is zero.
double cosine_sim(std::span<const double> u, std::span<const double> v);

struct DiscLoss {
  double loss = 0.0;
  Matrix z_grad;
  MlpGradients disc_grad;
};

// Mean negative log-likelihood of each sample's group under softmax(D(z)).
DiscLoss loss_disc(const Matrix& z, std::span<const int> groups, const Mlp& disc);

struct CenterLoss {
  double loss = 0.0;
  Matrix z_grad;
  Matrix center_grad;     // shaped like VirtualCenters::values
  std::size_t skipped = 0;  // samples dropped for lack of any contrast term
};

enum class VirtScope : std::uint8_t {
  kAllGroups,  // sum over every group a, as printed
  kOwnGroup,   // restrict to a = a_i
};

// For each sample and each group in scope: cross-entropy of the sample's
// class under softmax over the cosine similarities to that group's class
// centers. Batch-averaged. `groups` is only read for kOwnGroup.
CenterLoss loss_virt(const Matrix& z, std::span<const int> labels,
                     std::span<const int> groups, const VirtualCenters& centers,
                     VirtScope scope = VirtScope::kAllGroups);

enum class NegativeRule : std::uint8_t {
  kClassAndGroup,  // y_j != y_i and a_j != a_i
  kClassOrGroup,   // y_j != y_i or a_j != a_i
};

struct PairAssignment {
  std::vector<std::optional<std::size_t>> positive;
  std::vector<std::optional<std::size_t>> negative;
};

// Draws, for every index in order, one positive (same class and group) and
// one negative partner uniformly among the eligible indices j != i.
PairAssignment sample_pairs(std::span<const int> labels,
                            std::span<const int> groups, Rng& rng,
                            NegativeRule rule = NegativeRule::kClassAndGroup);

bool is_valid_assignment(const PairAssignment& pairs, std::span<const int> labels,
                         std::span<const int> groups, NegativeRule rule);

// Sample-to-sample dot products are clamped to [-kDotClamp, kDotClamp] before
// exponentiation; the clamped region carries no gradient.
inline constexpr double kDotClamp = 30.0;

// Per sample: -log[(e^{z_i.z_i'} + e^{d(V_{a_i,y_i}, z_i)}) /
//                  (e^{z_i.z_i^-} + sum_{a!=a_i, y!=y_i} e^{d(V_{a,y}, z_i)})]
// A missing partner drops its exponential; a sample whose denominator ends
// up empty is skipped. Summed over samples and divided by the batch size.
// Gradients flow into both ends of every sample pair.
CenterLoss loss_div(const Matrix& z, std::span<const int> labels,
                    std::span<const int> groups, const PairAssignment& pairs,
                    const VirtualCenters& centers);

struct HeadsLoss {
  double loss = 0.0;
  Matrix z_grad;
  std::vector<MlpGradients> head_grads;
};

// Cross-entropy with each sample routed to its own group's head, summed
// over the batch and divided by the full batch size.
HeadsLoss loss_group_heads(const Matrix& z, std::span<const int> labels,
                           std::span<const int> groups,
                           std::span<const Mlp> heads);

}  // namespace fairsde

#endif  // FAIRSDE_LOSSES_HPP_
