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

#include "fairsde/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairsde {
namespace {

double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * v[k];
  return acc;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

// Cosine similarity plus its partial derivatives, accumulated as
// `scale * d cos / d z` into z_grad and `scale * d cos / d v` into v_grad.
struct Cosine {
  std::span<const double> v;
  std::span<const double> z;
  double nv = 0.0;
  double nz = 0.0;
  double value = 0.0;

  Cosine(std::span<const double> v_, std::span<const double> z_)
      : v(v_), z(z_), nv(norm(v_)), nz(norm(z_)) {
    if (nv == 0.0 || nz == 0.0) {
      throw std::domain_error("cosine similarity of a zero-norm vector");
    }
    value = dot(v, z) / (nv * nz);
  }

  void accumulate(double scale, std::span<double> z_grad,
                  std::span<double> v_grad) const {
    const double inv = 1.0 / (nv * nz);
    const double cz = value / (nz * nz);
    const double cv = value / (nv * nv);
    for (std::size_t k = 0; k < z.size(); ++k) {
      z_grad[k] += scale * (v[k] * inv - cz * z[k]);
      v_grad[k] += scale * (z[k] * inv - cv * v[k]);
    }
  }
};

double log_sum_exp(std::span<const double> xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

void check_batch(const Matrix& z, std::span<const int> labels,
                 std::span<const int> groups) {
  if (labels.size() != z.rows || groups.size() != z.rows) {
    throw std::invalid_argument("loss: batch labels/groups do not match rows");
  }
}

void check_centers(const Matrix& z, std::span<const int> labels,
                   std::span<const int> groups, const VirtualCenters& centers,
                   bool check_groups) {
  if (centers.dim() != z.cols) {
    throw std::invalid_argument("loss: center dimension does not match z");
  }
  for (std::size_t i = 0; i < z.rows; ++i) {
    if (labels[i] < 0 || labels[i] >= centers.num_classes) {
      throw std::invalid_argument("loss: label out of range");
    }
    if (check_groups && (groups[i] < 0 || groups[i] >= centers.num_groups)) {
      throw std::invalid_argument("loss: group out of range");
    }
  }
}

}  // namespace

VirtualCenters VirtualCenters::kaiming(int num_groups, int num_classes,
                                       std::size_t dim, Rng& rng) {
  if (num_groups < 1 || num_classes < 1 || dim == 0) {
    throw std::invalid_argument("VirtualCenters: empty shape");
  }
  VirtualCenters vc{num_groups, num_classes,
                    Matrix(static_cast<std::size_t>(num_groups * num_classes), dim)};
  const double bound = std::sqrt(6.0 / double(dim));
  for (double& v : vc.values.data) v = rng.uniform(-bound, bound);
  return vc;
}

std::size_t VirtualCenters::reinitialize_degenerate(Rng& rng, double min_norm) {
  const double bound = std::sqrt(6.0 / double(dim()));
  std::size_t redrawn = 0;
  for (std::size_t r = 0; r < values.rows; ++r) {
    auto row = values.row(r);
    if (norm(row) >= min_norm) continue;
    do {
      for (double& v : row) v = rng.uniform(-bound, bound);
    } while (norm(row) < min_norm);
    ++redrawn;
  }
  return redrawn;
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine_sim: dimension mismatch");
  }
  return Cosine(u, v).value;
}

DiscLoss loss_disc(const Matrix& z, std::span<const int> groups, const Mlp& disc) {
  if (groups.size() != z.rows) {
    throw std::invalid_argument("loss_disc: group count does not match batch");
  }
  const auto num_groups = static_cast<int>(disc.output_dim());
  for (int g : groups) {
    if (g < 0 || g >= num_groups) {
      throw std::invalid_argument("loss_disc: group index " + std::to_string(g) +
                                  " out of range");
    }
  }
  const ForwardPass pass = forward(disc, z);
  CrossEntropy ce = softmax_cross_entropy(pass.output, groups);
  BackwardResult back = backward(disc, pass, ce.logits_grad);
  return DiscLoss{ce.loss, std::move(back.input_grad), std::move(back.params)};
}

CenterLoss loss_virt(const Matrix& z, std::span<const int> labels,
                     std::span<const int> groups, const VirtualCenters& centers,
                     VirtScope scope) {
  if (labels.size() != z.rows) {
    throw std::invalid_argument("loss_virt: label count does not match batch");
  }
  const bool own = scope == VirtScope::kOwnGroup;
  if (own && groups.size() != z.rows) {
    throw std::invalid_argument("loss_virt: group count does not match batch");
  }
  check_centers(z, labels, groups, centers, own);

  const std::size_t batch = z.rows;
  CenterLoss out{0.0, Matrix(batch, z.cols), Matrix(centers.values.rows, z.cols), 0};
  if (batch == 0) return out;
  const int C = centers.num_classes;
  std::vector<double> logits(static_cast<std::size_t>(C));
  std::vector<Cosine> cos;
  cos.reserve(static_cast<std::size_t>(C));

  for (std::size_t i = 0; i < batch; ++i) {
    const auto zi = z.row(i);
    const int a_begin = own ? groups[i] : 0;
    const int a_end = own ? groups[i] + 1 : centers.num_groups;
    for (int a = a_begin; a < a_end; ++a) {
      cos.clear();
      for (int y = 0; y < C; ++y) {
        cos.emplace_back(centers.center(a, y), zi);
        logits[static_cast<std::size_t>(y)] = cos.back().value;
      }
      const double lse = log_sum_exp(logits);
      out.loss += lse - logits[static_cast<std::size_t>(labels[i])];
      for (int y = 0; y < C; ++y) {
        const double p = std::exp(logits[static_cast<std::size_t>(y)] - lse);
        const double g = (p - (y == labels[i] ? 1.0 : 0.0)) / double(batch);
        cos[static_cast<std::size_t>(y)].accumulate(
            g, out.z_grad.row(i), out.center_grad.row(centers.index(a, y)));
      }
    }
  }
  out.loss /= double(batch);
  return out;
}

PairAssignment sample_pairs(std::span<const int> labels,
                            std::span<const int> groups, Rng& rng,
                            NegativeRule rule) {
  if (labels.size() != groups.size()) {
    throw std::invalid_argument("sample_pairs: labels/groups size mismatch");
  }
  const std::size_t n = labels.size();
  PairAssignment pairs{std::vector<std::optional<std::size_t>>(n),
                       std::vector<std::optional<std::size_t>>(n)};
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) {
    pos.clear();
    neg.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool same_class = labels[j] == labels[i];
      const bool same_group = groups[j] == groups[i];
      if (same_class && same_group) pos.push_back(j);
      const bool negative = rule == NegativeRule::kClassAndGroup
                                ? (!same_class && !same_group)
                                : (!same_class || !same_group);
      if (negative) neg.push_back(j);
    }
    if (!pos.empty()) pairs.positive[i] = pos[rng.below(pos.size())];
    if (!neg.empty()) pairs.negative[i] = neg[rng.below(neg.size())];
  }
  return pairs;
}

bool is_valid_assignment(const PairAssignment& pairs, std::span<const int> labels,
                         std::span<const int> groups, NegativeRule rule) {
  const std::size_t n = labels.size();
  if (pairs.positive.size() != n || pairs.negative.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto& p = pairs.positive[i]) {
      if (*p >= n || *p == i || labels[*p] != labels[i] || groups[*p] != groups[i]) {
        return false;
      }
    }
    if (const auto& q = pairs.negative[i]) {
      if (*q >= n || *q == i) return false;
      const bool dc = labels[*q] != labels[i];
      const bool dg = groups[*q] != groups[i];
      if (rule == NegativeRule::kClassAndGroup ? !(dc && dg) : !(dc || dg)) {
        return false;
      }
    }
  }
  return true;
}

CenterLoss loss_div(const Matrix& z, std::span<const int> labels,
                    std::span<const int> groups, const PairAssignment& pairs,
                    const VirtualCenters& centers) {
  check_batch(z, labels, groups);
  check_centers(z, labels, groups, centers, true);
  const std::size_t batch = z.rows;
  if (pairs.positive.size() != batch || pairs.negative.size() != batch) {
    throw std::invalid_argument("loss_div: pair assignment does not match batch");
  }
  CenterLoss out{0.0, Matrix(batch, z.cols), Matrix(centers.values.rows, z.cols), 0};
  if (batch == 0) return out;
  const double inv_batch = 1.0 / double(batch);

  // Each exponent is either a clamped sample dot product or a center cosine.
  struct Term {
    double value;
    std::optional<std::size_t> partner;  // set for dot-product terms
    bool active = true;                  // false when clamped
    std::optional<Cosine> cosine;
    std::size_t center_row = 0;
  };
  auto dot_term = [&](std::size_t i, std::size_t j) {
    const double raw = dot(z.row(i), z.row(j));
    const double clamped = std::clamp(raw, -kDotClamp, kDotClamp);
    return Term{clamped, j, raw == clamped, std::nullopt, 0};
  };
  auto center_term = [&](std::size_t i, int a, int y) {
    Cosine c(centers.center(a, y), z.row(i));
    return Term{c.value, std::nullopt, true, c, centers.index(a, y)};
  };

  std::vector<Term> num, den;
  std::vector<double> vals;
  for (std::size_t i = 0; i < batch; ++i) {
    num.clear();
    den.clear();
    if (const auto& p = pairs.positive[i]) num.push_back(dot_term(i, *p));
    num.push_back(center_term(i, groups[i], labels[i]));
    if (const auto& q = pairs.negative[i]) den.push_back(dot_term(i, *q));
    for (int a = 0; a < centers.num_groups; ++a) {
      if (a == groups[i]) continue;
      for (int y = 0; y < centers.num_classes; ++y) {
        if (y == labels[i]) continue;
        den.push_back(center_term(i, a, y));
      }
    }
    if (den.empty()) {
      ++out.skipped;
      continue;
    }

    auto lse_of = [&](const std::vector<Term>& terms) {
      vals.clear();
      for (const auto& t : terms) vals.push_back(t.value);
      return log_sum_exp(vals);
    };
    const double lse_num = lse_of(num);
    const double lse_den = lse_of(den);
    const double term = lse_den - lse_num;
    if (!std::isfinite(term)) {
      throw DivergenceError("loss_div: non-finite term at batch index " +
                            std::to_string(i));
    }
    out.loss += term;

    // d term / d t = -softmax(num) for numerator terms, +softmax(den) for
    // denominator terms.
    auto propagate = [&](const std::vector<Term>& terms, double lse, double sign) {
      for (const auto& t : terms) {
        const double w = sign * std::exp(t.value - lse) * inv_batch;
        if (t.cosine) {
          t.cosine->accumulate(w, out.z_grad.row(i), out.center_grad.row(t.center_row));
        } else if (t.active) {
          const std::size_t j = *t.partner;
          auto gi = out.z_grad.row(i);
          auto gj = out.z_grad.row(j);
          const auto zi = z.row(i);
          const auto zj = z.row(j);
          for (std::size_t k = 0; k < z.cols; ++k) {
            gi[k] += w * zj[k];
            gj[k] += w * zi[k];
          }
        }
      }
    };
    propagate(num, lse_num, -1.0);
    propagate(den, lse_den, 1.0);
  }
  out.loss *= inv_batch;
  return out;
}

HeadsLoss loss_group_heads(const Matrix& z, std::span<const int> labels,
                           std::span<const int> groups, std::span<const Mlp> heads) {
  check_batch(z, labels, groups);
  const std::size_t batch = z.rows;
  HeadsLoss out{0.0, Matrix(batch, z.cols), {}};
  out.head_grads.reserve(heads.size());
  for (const auto& head : heads) out.head_grads.push_back(MlpGradients::zeros_like(head));
  for (int g : groups) {
    if (g < 0 || static_cast<std::size_t>(g) >= heads.size()) {
      throw std::invalid_argument("loss_group_heads: group out of range");
    }
  }
  if (batch == 0) return out;

  std::vector<std::size_t> rows;
  std::vector<int> targets;
  for (std::size_t a = 0; a < heads.size(); ++a) {
    rows.clear();
    targets.clear();
    for (std::size_t i = 0; i < batch; ++i) {
      if (static_cast<std::size_t>(groups[i]) == a) {
        rows.push_back(i);
        targets.push_back(labels[i]);
      }
    }
    if (rows.empty()) continue;
    Matrix zg(rows.size(), z.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy_n(z.row(rows[r]).begin(), z.cols, zg.row(r).begin());
    }
    const ForwardPass pass = forward(heads[a], zg);
    CrossEntropy ce = softmax_cross_entropy(pass.output, targets, double(batch));
    out.loss += ce.loss;
    BackwardResult back = backward(heads[a], pass, ce.logits_grad);
    out.head_grads[a] = std::move(back.params);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy_n(back.input_grad.row(r).begin(), z.cols, out.z_grad.row(rows[r]).begin());
    }
  }
  return out;
}

}  // namespace fairsde
