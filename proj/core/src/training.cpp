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

#include "fairsde/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "fairsde/metrics.hpp"

namespace fairsde {
namespace {

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(x.row(rows[r]).begin(), x.cols, out.row(r).begin());
  }
  return out;
}

template <typename T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

double fraction_correct(const std::vector<int>& pred, std::span<const int> truth) {
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return double(hit) / double(pred.size());
}

void check_finite(double value, const char* what, int epoch) {
  if (!std::isfinite(value)) {
    throw DivergenceError(std::string(what) + " became non-finite in epoch " +
                          std::to_string(epoch));
  }
}

// Batches of a shuffled index list; the final batch may be short.
template <typename Fn>
void for_each_batch(std::vector<std::size_t>& order, std::size_t batch_size,
                    Rng& rng, Fn&& fn) {
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    fn(std::span<const std::size_t>(order.data() + start, end - start));
  }
}

void require_train(const Dataset& dataset) {
  if (dataset.indices(Split::kTrain).empty()) {
    throw DataError("training split is empty");
  }
}

double val_accuracy(const Scorer& scorer, const Dataset& dataset) {
  const auto view = dataset.view(Split::kVal);
  if (view.labels.empty()) return 0.0;
  return fraction_correct(argmax_rows(scorer(view.x, view.groups)), view.labels);
}

}  // namespace

void HyperParams::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("hyperparameters: " + msg);
  };
  if (!(lambda_disc >= 0.0) || !(lambda_virt >= 0.0) || !(lambda_div >= 0.0)) {
    fail("loss coefficients must be nonnegative");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr decay must lie in (0, 1]");
  if (batch_size < 2) fail("batch size must be >= 2");
  if (epochs < 1) fail("epochs must be >= 1");
  if (arch.hidden == 0 || arch.repr_dim == 0) fail("layer widths must be positive");
}

SeedLineage SeedLineage::from(std::uint64_t seed) {
  return SeedLineage{seed, derive_seed(seed, "init"), derive_seed(seed, "shuffle"),
                     derive_seed(seed, "pairs"), derive_seed(seed, "probe")};
}

Mlp make_backbone(std::size_t input_dim, const Architecture& arch, Rng& rng) {
  const std::size_t sizes[] = {input_dim, arch.hidden, arch.repr_dim};
  const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
  return Mlp::kaiming(sizes, acts, rng);
}

Mlp make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const std::size_t sizes[] = {in, out};
  const Activation acts[] = {Activation::kIdentity};
  return Mlp::kaiming(sizes, acts, rng);
}

ErmModel init_erm(const Dataset& dataset, const HyperParams& hp) {
  hp.validate();
  Rng rng(SeedLineage::from(hp.seed).init);
  ErmModel model;
  model.backbone = make_backbone(dataset.dim(), hp.arch, rng);
  model.head = make_linear(hp.arch.repr_dim,
                           static_cast<std::size_t>(dataset.num_classes()), rng);
  return model;
}

FairSdeModel init_fairsde(const Dataset& dataset, const HyperParams& hp) {
  hp.validate();
  Rng rng(SeedLineage::from(hp.seed).init);
  FairSdeModel model;
  const auto G = static_cast<std::size_t>(dataset.num_groups());
  const auto C = static_cast<std::size_t>(dataset.num_classes());
  model.backbone = make_backbone(dataset.dim(), hp.arch, rng);
  model.disc = make_linear(hp.arch.repr_dim, G, rng);
  model.centers = VirtualCenters::kaiming(dataset.num_groups(), dataset.num_classes(),
                                          hp.arch.repr_dim, rng);
  for (std::size_t a = 0; a < G; ++a) {
    model.heads.push_back(make_linear(hp.arch.repr_dim, C, rng));
  }
  return model;
}

ErmModel train_erm(const Dataset& dataset, const HyperParams& hp) {
  require_train(dataset);
  ErmModel model = init_erm(dataset, hp);
  const auto lineage = SeedLineage::from(hp.seed);
  Rng shuffle_rng(lineage.shuffle);
  TrainState f_state = TrainState::for_net(model.backbone, hp.lr, hp.momentum, hp.lr_decay);
  TrainState h_state = TrainState::for_net(model.head, hp.lr, hp.momentum, hp.lr_decay);

  const Matrix& x = dataset.features();
  std::vector<std::size_t> order = dataset.indices(Split::kTrain);
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    double loss_sum = 0.0;
    const double lr = f_state.lr;
    for_each_batch(order, hp.batch_size, shuffle_rng, [&](auto rows) {
      const Matrix xb = gather_rows(x, rows);
      std::vector<int> yb;
      for (std::size_t r : rows) yb.push_back(dataset.label(r));
      const ForwardPass fp = forward(model.backbone, xb);
      const ForwardPass hpass = forward(model.head, fp.output);
      const CrossEntropy ce = softmax_cross_entropy(hpass.output, yb);
      check_finite(ce.loss, "ERM loss", epoch);
      const BackwardResult hb = backward(model.head, hpass, ce.logits_grad);
      const BackwardResult fb = backward(model.backbone, fp, hb.input_grad);
      sgd_step(model.head, h_state, hb.params);
      sgd_step(model.backbone, f_state, fb.params);
      loss_sum += ce.loss * double(rows.size());
    });
    decay_lr(f_state);
    decay_lr(h_state);
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / double(order.size());
    entry.lr = lr;
    entry.val_accuracy = val_accuracy(erm_scorer(model), dataset);
    model.log.push_back(entry);
  }
  return model;
}

DecoupledModel train_decoupled_baseline(const ErmModel& erm, const Dataset& dataset,
                                        const HyperParams& hp) {
  hp.validate();
  require_train(dataset);
  const int G = dataset.num_groups();
  const auto C = static_cast<std::size_t>(dataset.num_classes());
  const auto view = dataset.view(Split::kTrain);
  if (erm.backbone.input_dim() != dataset.dim() ||
      erm.head.output_dim() != C) {
    throw std::invalid_argument("decoupled baseline: ERM model does not match dataset");
  }
  const Matrix z = predict(erm.backbone, view.x);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(G));
  for (std::size_t i = 0; i < view.groups.size(); ++i) {
    members[static_cast<std::size_t>(view.groups[i])].push_back(i);
  }
  for (int a = 0; a < G; ++a) {
    if (members[static_cast<std::size_t>(a)].empty()) {
      throw DataError("decoupled baseline: group " + std::to_string(a) +
                      " has no training samples");
    }
  }

  const auto lineage = SeedLineage::from(hp.seed);
  Rng init_rng(derive_seed(lineage.init, "decoupled"));
  Rng shuffle_rng(derive_seed(lineage.shuffle, "decoupled"));
  DecoupledModel model;
  std::vector<TrainState> states;
  for (int a = 0; a < G; ++a) {
    model.heads.push_back(make_linear(erm.backbone.output_dim(), C, init_rng));
    states.push_back(TrainState::for_net(model.heads.back(), hp.lr, hp.momentum,
                                         hp.lr_decay));
  }

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    double loss_sum = 0.0;
    const double lr = states.front().lr;
    for (int a = 0; a < G; ++a) {
      auto& order = members[static_cast<std::size_t>(a)];
      auto& head = model.heads[static_cast<std::size_t>(a)];
      auto& state = states[static_cast<std::size_t>(a)];
      for_each_batch(order, hp.batch_size, shuffle_rng, [&](auto rows) {
        const Matrix zb = gather_rows(z, rows);
        const auto yb = gather<int>(view.labels, rows);
        const ForwardPass pass = forward(head, zb);
        const CrossEntropy ce = softmax_cross_entropy(pass.output, yb);
        check_finite(ce.loss, "decoupled head loss", epoch);
        sgd_step(head, state, backward(head, pass, ce.logits_grad).params);
        loss_sum += ce.loss * double(rows.size());
      });
      decay_lr(state);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / double(view.labels.size());
    entry.lr = lr;
    entry.val_accuracy = val_accuracy(decoupled_scorer(erm, model), dataset);
    model.log.push_back(entry);
  }
  return model;
}

FairSdeGradients fairsde_gradients(const FairSdeModel& model, const Matrix& x,
                                   std::span<const int> labels,
                                   std::span<const int> groups,
                                   const PairAssignment& pairs,
                                   const HyperParams& hp) {
  const ForwardPass fp = forward(model.backbone, x);
  const Matrix& z = fp.output;

  HeadsLoss heads = loss_group_heads(z, labels, groups, model.heads);
  DiscLoss disc = loss_disc(z, groups, model.disc);
  CenterLoss virt = loss_virt(z, labels, groups, model.centers, hp.virt_scope);
  CenterLoss div = loss_div(z, labels, groups, pairs, model.centers);

  Matrix dz = heads.z_grad;
  for (std::size_t k = 0; k < dz.data.size(); ++k) {
    dz.data[k] += hp.lambda_disc * disc.z_grad.data[k] +
                  hp.lambda_virt * virt.z_grad.data[k] +
                  hp.lambda_div * div.z_grad.data[k];
  }

  FairSdeGradients g;
  g.backbone = backward(model.backbone, fp, dz).params;
  g.disc = std::move(disc.disc_grad.scale(hp.lambda_disc));
  g.centers = Matrix(model.centers.values.rows, model.centers.values.cols);
  for (std::size_t k = 0; k < g.centers.data.size(); ++k) {
    g.centers.data[k] = hp.lambda_virt * virt.center_grad.data[k] +
                        hp.lambda_div * div.center_grad.data[k];
  }
  g.heads = std::move(heads.head_grads);
  g.head_present.assign(model.heads.size(), false);
  for (int a : groups) g.head_present[static_cast<std::size_t>(a)] = true;
  g.loss = heads.loss;
  g.disc_loss = disc.loss;
  g.virt_loss = virt.loss;
  g.div_loss = div.loss;
  g.skipped_div = div.skipped;
  return g;
}

FairSdeModel train_fairsde(const Dataset& dataset, const HyperParams& hp) {
  require_train(dataset);
  {
    const int C = dataset.num_classes();
    std::vector<bool> seen(static_cast<std::size_t>(C * dataset.num_groups()), false);
    for (std::size_t i : dataset.indices(Split::kTrain)) {
      seen[static_cast<std::size_t>(dataset.group(i) * C + dataset.label(i))] = true;
    }
    for (std::size_t cell = 0; cell < seen.size(); ++cell) {
      if (!seen[cell]) {
        throw DataError("train_fairsde: cell (group " + std::to_string(int(cell) / C) +
                        ", class " + std::to_string(int(cell) % C) +
                        ") has no training samples");
      }
    }
  }

  FairSdeModel model = init_fairsde(dataset, hp);
  const auto lineage = SeedLineage::from(hp.seed);
  Rng shuffle_rng(lineage.shuffle);
  Rng pair_rng(lineage.pairs);
  Rng center_rng(derive_seed(lineage.init, "center-reinit"));

  TrainState f_state = TrainState::for_net(model.backbone, hp.lr, hp.momentum, hp.lr_decay);
  TrainState d_state = TrainState::for_net(model.disc, hp.lr, hp.momentum, hp.lr_decay);
  std::vector<TrainState> h_states;
  for (const auto& head : model.heads) {
    h_states.push_back(TrainState::for_net(head, hp.lr, hp.momentum, hp.lr_decay));
  }
  std::vector<double> center_velocity(model.centers.values.data.size(), 0.0);
  double lr = hp.lr;

  const Matrix& x = dataset.features();
  std::vector<std::size_t> order = dataset.indices(Split::kTrain);
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    for_each_batch(order, hp.batch_size, shuffle_rng, [&](auto rows) {
      const Matrix xb = gather_rows(x, rows);
      std::vector<int> yb, ab;
      for (std::size_t r : rows) {
        yb.push_back(dataset.label(r));
        ab.push_back(dataset.group(r));
      }
      const PairAssignment pairs = sample_pairs(yb, ab, pair_rng, hp.negative_rule);
      const FairSdeGradients g = fairsde_gradients(model, xb, yb, ab, pairs, hp);
      check_finite(g.loss, "classification loss", epoch);
      check_finite(g.disc_loss, "L_disc", epoch);
      check_finite(g.virt_loss, "L_virt", epoch);
      check_finite(g.div_loss, "L_div", epoch);

      sgd_step(model.disc, d_state, g.disc);
      for (double v : g.centers.data) {
        if (!std::isfinite(v)) {
          throw DivergenceError("center gradient became non-finite in epoch " +
                                std::to_string(epoch));
        }
      }
      momentum_update(model.centers.values.data, center_velocity, g.centers.data,
                      lr, hp.momentum);
      model.center_reinits += model.centers.reinitialize_degenerate(center_rng);
      sgd_step(model.backbone, f_state, g.backbone);
      for (std::size_t a = 0; a < model.heads.size(); ++a) {
        if (g.head_present[a]) sgd_step(model.heads[a], h_states[a], g.heads[a]);
      }

      const double n = double(rows.size());
      entry.loss += g.loss * n;
      entry.disc += g.disc_loss * n;
      entry.virt += g.virt_loss * n;
      entry.div += g.div_loss * n;
      entry.skipped_div += g.skipped_div;
    });
    const double total = double(order.size());
    entry.loss /= total;
    entry.disc /= total;
    entry.virt /= total;
    entry.div /= total;

    decay_lr(f_state);
    decay_lr(d_state);
    for (auto& s : h_states) decay_lr(s);
    lr *= hp.lr_decay;

    entry.val_accuracy = val_accuracy(expert_scorer(model), dataset);
    model.log.push_back(entry);
  }
  return model;
}

Representations extract_representations(const Mlp& backbone, const Dataset& dataset,
                                         Split split) {
  if (backbone.input_dim() != dataset.dim()) {
    throw std::invalid_argument("extract_representations: backbone expects dimension " +
                                std::to_string(backbone.input_dim()) + ", data has " +
                                std::to_string(dataset.dim()));
  }
  auto view = dataset.view(split);
  if (view.labels.empty()) {
    throw DataError("extract_representations: split '" +
                    std::string(split_name(split)) + "' is empty");
  }
  return Representations{predict(backbone, view.x), std::move(view.labels),
                         std::move(view.groups)};
}

Representations extract_representations(const FairSdeModel& model,
                                         const Dataset& dataset, Split split) {
  return extract_representations(model.backbone, dataset, split);
}

Representations extract_representations(const ErmModel& model,
                                         const Dataset& dataset, Split split) {
  return extract_representations(model.backbone, dataset, split);
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_representations_csv(const Representations& reps, std::ostream& out) {
  for (std::size_t k = 0; k < reps.z.cols; ++k) out << 'z' << k << ',';
  out << "label,group\n";
  for (std::size_t i = 0; i < reps.z.rows; ++i) {
    for (double v : reps.z.row(i)) {
      put_double(out, v);
      out << ',';
    }
    out << reps.labels[i] << ',' << reps.groups[i] << '\n';
  }
}

void write_training_log_csv(std::span<const EpochLog> log, std::ostream& out) {
  out << "epoch,L,L_disc,L_virt,L_div,lr\n";
  for (const auto& e : log) {
    out << e.epoch << ',';
    for (double v : {e.loss, e.disc, e.virt, e.div}) {
      put_double(out, v);
      out << ',';
    }
    put_double(out, e.lr);
    out << '\n';
  }
}

double discriminator_accuracy(const FairSdeModel& model, const Dataset& dataset,
                              Split split) {
  const auto reps = extract_representations(model, dataset, split);
  return fraction_correct(argmax_rows(predict(model.disc, reps.z)), reps.groups);
}

ProbeResult train_group_probe(const Representations& train,
                              const Representations& eval, int num_groups,
                              const ProbeOptions& options) {
  if (train.z.rows == 0) throw DataError("probe: empty training representations");
  if (train.z.cols != eval.z.cols) {
    throw std::invalid_argument("probe: representation dimensions differ");
  }
  Rng init_rng(derive_seed(options.seed, "probe-init"));
  Rng shuffle_rng(derive_seed(options.seed, "probe-shuffle"));
  ProbeResult result;
  result.probe = make_linear(train.z.cols, static_cast<std::size_t>(num_groups), init_rng);
  TrainState state = TrainState::for_net(result.probe, options.lr);

  std::vector<std::size_t> order(train.z.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for_each_batch(order, options.batch_size, shuffle_rng, [&](auto rows) {
      const Matrix zb = gather_rows(train.z, rows);
      const auto ab = gather<int>(train.groups, rows);
      const ForwardPass pass = forward(result.probe, zb);
      const CrossEntropy ce = softmax_cross_entropy(pass.output, ab);
      check_finite(ce.loss, "probe loss", epoch);
      sgd_step(result.probe, state, backward(result.probe, pass, ce.logits_grad).params);
    });
    decay_lr(state);
  }
  result.train_accuracy =
      fraction_correct(argmax_rows(predict(result.probe, train.z)), train.groups);
  result.eval_accuracy =
      fraction_correct(argmax_rows(predict(result.probe, eval.z)), eval.groups);
  return result;
}

Scorer erm_scorer(const ErmModel& erm) {
  return [backbone = erm.backbone, head = erm.head](const Matrix& x,
                                                    std::span<const int>) {
    return predict(head, predict(backbone, x));
  };
}

namespace {

Matrix route_heads(const std::vector<Mlp>& heads, const Matrix& z,
                   std::span<const int> groups) {
  if (groups.size() != z.rows) {
    throw std::invalid_argument("scorer: group count does not match rows");
  }
  const std::size_t C = heads.front().output_dim();
  Matrix out(z.rows, C);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const int a = groups[i];
    if (a < 0 || static_cast<std::size_t>(a) >= heads.size()) {
      throw std::invalid_argument("scorer: unknown group " + std::to_string(a));
    }
    const auto logits = forward(heads[static_cast<std::size_t>(a)], z.row(i));
    std::copy(logits.begin(), logits.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

Scorer expert_scorer(const FairSdeModel& model) {
  return [backbone = model.backbone, heads = model.heads](
             const Matrix& x, std::span<const int> groups) {
    return route_heads(heads, predict(backbone, x), groups);
  };
}

Scorer decoupled_scorer(const ErmModel& erm, const DecoupledModel& decoupled) {
  return [backbone = erm.backbone, heads = decoupled.heads](
             const Matrix& x, std::span<const int> groups) {
    return route_heads(heads, predict(backbone, x), groups);
  };
}

}  // namespace fairsde
