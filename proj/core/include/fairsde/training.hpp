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

#ifndef FAIRSDE_TRAINING_HPP_
#define FAIRSDE_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairsde/data.hpp"
#include "fairsde/losses.hpp"
#include "fairsde/matrix.hpp"
#include "fairsde/net.hpp"

namespace fairsde {

// Backbone f is d -> hidden (relu) -> repr_dim; discriminator and every
// classifier head are single linear layers on top of it.
struct Architecture {
  std::size_t hidden = 32;
  std::size_t repr_dim = 8;
};

struct HyperParams {
  double lambda_disc = 0.05;
  double lambda_virt = 0.05;
  double lambda_div = 0.05;
  double lr = 0.01;
  double momentum = 0.9;
  double lr_decay = 0.9;
  std::size_t batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 0;
  NegativeRule negative_rule = NegativeRule::kClassAndGroup;
  VirtScope virt_scope = VirtScope::kAllGroups;
  Architecture arch;

  void validate() const;
};

// Sub-seeds of HyperParams::seed used by the training routines.
struct SeedLineage {
  std::uint64_t seed = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t pairs = 0;
  std::uint64_t probe = 0;

  static SeedLineage from(std::uint64_t seed);
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;       // classification cross-entropy
  double disc = 0.0;
  double virt = 0.0;
  double div = 0.0;
  double lr = 0.0;         // learning rate used during the epoch
  double val_accuracy = 0.0;  // recorded only, never used to stop
  std::size_t skipped_div = 0;
};

struct ErmModel {
  Mlp backbone;
  Mlp head;
  std::vector<EpochLog> log;
};

// Per-group heads over the frozen ERM backbone.
struct DecoupledModel {
  std::vector<Mlp> heads;
  std::vector<EpochLog> log;
};

struct FairSdeModel {
  Mlp backbone;
  Mlp disc;
  VirtualCenters centers;
  std::vector<Mlp> heads;
  std::vector<EpochLog> log;
  std::size_t center_reinits = 0;
};

Mlp make_backbone(std::size_t input_dim, const Architecture& arch, Rng& rng);
Mlp make_linear(std::size_t in, std::size_t out, Rng& rng);

// Initial parameters exactly as the trainers start from them.
ErmModel init_erm(const Dataset& dataset, const HyperParams& hp);
FairSdeModel init_fairsde(const Dataset& dataset, const HyperParams& hp);

ErmModel train_erm(const Dataset& dataset, const HyperParams& hp);
DecoupledModel train_decoupled_baseline(const ErmModel& erm, const Dataset& dataset,
                                        const HyperParams& hp);

// One Algorithm-style step's gradients, each routed to exactly the
// parameters it updates:
//   disc     <- lambda_disc * dL_disc
//   centers  <- lambda_virt * dL_virt + lambda_div * dL_div
//   backbone <- d(L + lambda_disc L_disc + lambda_virt L_virt + lambda_div L_div)
//   heads[a] <- dL over group-a samples
struct FairSdeGradients {
  MlpGradients backbone;
  MlpGradients disc;
  Matrix centers;
  std::vector<MlpGradients> heads;
  std::vector<bool> head_present;
  double loss = 0.0;
  double disc_loss = 0.0;
  double virt_loss = 0.0;
  double div_loss = 0.0;
  std::size_t skipped_div = 0;
};

FairSdeGradients fairsde_gradients(const FairSdeModel& model, const Matrix& x,
                                   std::span<const int> labels,
                                   std::span<const int> groups,
                                   const PairAssignment& pairs,
                                   const HyperParams& hp);

FairSdeModel train_fairsde(const Dataset& dataset, const HyperParams& hp);

struct Representations {
  Matrix z;
  std::vector<int> labels;
  std::vector<int> groups;
};

Representations extract_representations(const Mlp& backbone, const Dataset& dataset,
                                         Split split);
Representations extract_representations(const FairSdeModel& model,
                                         const Dataset& dataset, Split split);
Representations extract_representations(const ErmModel& model,
                                         const Dataset& dataset, Split split);

// Columns z0..z{m-1},label,group.
void write_representations_csv(const Representations& reps, std::ostream& out);

// Columns epoch,L,L_disc,L_virt,L_div,lr.
void write_training_log_csv(std::span<const EpochLog> log, std::ostream& out);

// Accuracy of the model's own discriminator on a split's representations.
double discriminator_accuracy(const FairSdeModel& model, const Dataset& dataset,
                              Split split);

struct ProbeOptions {
  int epochs = 30;
  double lr = 0.05;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  Mlp probe;
  double train_accuracy = 0.0;
  double eval_accuracy = 0.0;
};

// Fits a fresh linear group classifier on `train` representations with
// momentum SGD and scores it on `eval`.
ProbeResult train_group_probe(const Representations& train,
                              const Representations& eval, int num_groups,
                              const ProbeOptions& options);

// Class logits for a batch of inputs with known groups.
using Scorer = std::function<Matrix(const Matrix& x, std::span<const int> groups)>;

Scorer erm_scorer(const ErmModel& erm);
Scorer expert_scorer(const FairSdeModel& model);
Scorer decoupled_scorer(const ErmModel& erm, const DecoupledModel& decoupled);

}  // namespace fairsde

#endif  // FAIRSDE_TRAINING_HPP_
