/* Copyright 2026 The msra2d Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "msra/lattice.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "msra/logspace.hpp"

namespace msra {

LogTensor::LogTensor(int height, int width, int states)
    : height_(height), width_(width), states_(states) {
  v_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                static_cast<std::size_t>(states),
            kLogZero);
}

bool feasible(int i, int j, int s, int extended_len, int height, int width) {
  // Each remaining cell advances at most two positions; each visited cell at
  // most two as well, starting from position 0 or 1.
  if (s < extended_len - 2 * (height - i + width - j - 1)) return false;
  if (s > 2 * (i + j) + 1) return false;
  return true;
}

int min_path_cells(std::span<const int> labels) {
  int n = static_cast<int>(labels.size());
  for (std::size_t k = 1; k < labels.size(); ++k) {
    if (labels[k] == labels[k - 1]) ++n;
  }
  return n;
}

namespace {

void check_grid(const ProbGrid& x, GridCheck check) {
  if (check == GridCheck::kValidated) {
    auto diag = validate_grid(x);
    if (!diag.ok()) {
      throw InvalidInput("probability grid failed validation: " +
                         diag.summary());
    }
    return;
  }
  for (double v : x.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("relaxed grid entries must be finite and >= 0");
    }
  }
}

void check_label(const ProbGrid& x, const LabelSequence& l,
                 std::size_t which) {
  if (l.max_class() >= x.classes()) {
    throw InvalidInput("label class " + std::to_string(l.max_class()) +
                       " outside grid with " + std::to_string(x.classes()) +
                       " classes");
  }
  int cells = x.height() + x.width() - 1;
  int need = min_path_cells(l.labels());
  if (need > cells) {
    throw InfeasibleTarget("target sequence " + std::to_string(which) +
                               " needs " + std::to_string(need) +
                               " path cells but a " +
                               std::to_string(x.height()) + "x" +
                               std::to_string(x.width()) + " grid has " +
                               std::to_string(cells),
                           which);
  }
}

// Log emissions, floored.
std::vector<double> log_emissions(const ProbGrid& x) {
  std::vector<double> out(x.data().size());
  auto d = x.data();
  for (std::size_t n = 0; n < d.size(); ++n) {
    out[n] = std::log(std::max(d[n], kProbFloor));
  }
  return out;
}

struct Lattice {
  const ProbGrid& x;
  const ExtendedLabel& lp;
  std::vector<double> logx;
  double log_h;
  double log_v;

  double emit(int i, int j, int s) const {
    std::size_t base = (static_cast<std::size_t>(i) *
                            static_cast<std::size_t>(x.width()) +
                        static_cast<std::size_t>(j)) *
                       static_cast<std::size_t>(x.classes());
    return logx[base + static_cast<std::size_t>(lp[s])];
  }

  // Sum over predecessor positions of a neighbouring alpha column.
  double gather(const LogTensor& a, int i, int j, int s) const {
    double acc = a.at(i, j, s);
    if (s >= 1) acc = log_add(acc, a.at(i, j, s - 1));
    if (s >= 2 && lp[s] != kBlank && lp[s] != lp[s - 2]) {
      acc = log_add(acc, a.at(i, j, s - 2));
    }
    return acc;
  }

  // Sum over successor positions of a neighbouring beta column, each weighted
  // by the successor cell's emission.
  double scatter(const LogTensor& b, int i, int j, int s) const {
    int n = lp.size();
    double acc = b.at(i, j, s) + emit(i, j, s);
    if (s + 1 < n) acc = log_add(acc, b.at(i, j, s + 1) + emit(i, j, s + 1));
    if (s + 2 < n && lp[s] != kBlank && lp[s] != lp[s + 2]) {
      acc = log_add(acc, b.at(i, j, s + 2) + emit(i, j, s + 2));
    }
    return acc;
  }
};

Lattice make_lattice(const ProbGrid& x, const ExtendedLabel& lp,
                     const LambdaParams& lambda) {
  return Lattice{x, lp, log_emissions(x), safe_log(lambda.horizontal),
                 safe_log(lambda.vertical)};
}

AlphaTensor run_forward(const Lattice& lat) {
  const int H = lat.x.height();
  const int W = lat.x.width();
  const int S = lat.lp.size();
  AlphaTensor alpha{lat.lp, LogTensor(H, W, S)};
  LogTensor& a = alpha.log;

  for (int s = 0; s < 2 && s < S; ++s) {
    if (feasible(0, 0, s, S, H, W)) a.at(0, 0, s) = lat.emit(0, 0, s);
  }
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      if (i == 0 && j == 0) continue;
      for (int s = 0; s < S; ++s) {
        if (!feasible(i, j, s, S, H, W)) continue;
        double acc = kLogZero;
        if (j > 0) acc = lat.log_h + lat.gather(a, i, j - 1, s);
        if (i > 0) acc = log_add(acc, lat.log_v + lat.gather(a, i - 1, j, s));
        if (acc != kLogZero) a.at(i, j, s) = acc + lat.emit(i, j, s);
      }
    }
  }
  return alpha;
}

BetaTensor run_backward(const Lattice& lat) {
  const int H = lat.x.height();
  const int W = lat.x.width();
  const int S = lat.lp.size();
  BetaTensor beta{lat.lp, LogTensor(H, W, S)};
  LogTensor& b = beta.log;

  for (int s = S - 2; s < S; ++s) {
    if (s >= 0 && feasible(H - 1, W - 1, s, S, H, W)) {
      b.at(H - 1, W - 1, s) = 0.0;
    }
  }
  for (int i = H - 1; i >= 0; --i) {
    for (int j = W - 1; j >= 0; --j) {
      if (i == H - 1 && j == W - 1) continue;
      for (int s = 0; s < S; ++s) {
        if (!feasible(i, j, s, S, H, W)) continue;
        double acc = kLogZero;
        if (j + 1 < W) acc = lat.log_h + lat.scatter(b, i, j + 1, s);
        if (i + 1 < H) {
          acc = log_add(acc, lat.log_v + lat.scatter(b, i + 1, j, s));
        }
        b.at(i, j, s) = acc;
      }
    }
  }
  return beta;
}

double final_log_prob(const AlphaTensor& alpha) {
  const auto& a = alpha.log;
  int S = a.states();
  return log_add(a.at(a.height() - 1, a.width() - 1, S - 1),
                 a.at(a.height() - 1, a.width() - 1, S - 2));
}

double loss_from_log_probs(const std::vector<double>& log_probs,
                           SetLossVariant variant) {
  if (variant == SetLossVariant::kSumLog) {
    double sum = 0.0;
    for (double lp : log_probs) sum += lp;
    return -sum;
  }
  return -(log_sum_exp(log_probs) -
           std::log(static_cast<double>(log_probs.size())));
}

// Per-entry posterior mass gamma[i,j](k) = sum_t w_t sum_{s: l'_s = k}
// alpha_t*beta_t, with w_t = 1/sum p (mean variant) or 1/p_t (sum-log).
struct Occupancy {
  std::vector<double> log_probs;
  GridGradient gamma;
};

Occupancy occupancy(const ProbGrid& x, const TargetSet& targets,
                    const LambdaParams& lambda, SetLossVariant variant,
                    GridCheck check) {
  lambda.validate();
  check_grid(x, check);
  const auto& seqs = targets.sequences();
  for (std::size_t t = 0; t < seqs.size(); ++t) check_label(x, seqs[t], t);

  std::vector<AlphaTensor> alphas;
  std::vector<BetaTensor> betas;
  std::vector<ExtendedLabel> labels;
  labels.reserve(seqs.size());
  for (const auto& l : seqs) labels.push_back(extend_label(l));

  Occupancy occ{{}, GridGradient(x.shape())};
  occ.log_probs.reserve(seqs.size());
  for (std::size_t t = 0; t < seqs.size(); ++t) {
    Lattice lat = make_lattice(x, labels[t], lambda);
    alphas.push_back(run_forward(lat));
    betas.push_back(run_backward(lat));
    occ.log_probs.push_back(final_log_prob(alphas.back()));
  }
  double log_total = log_sum_exp(occ.log_probs);
  for (std::size_t t = 0; t < seqs.size(); ++t) {
    double norm = variant == SetLossVariant::kSumLog ? occ.log_probs[t]
                                                     : log_total;
    if (norm == kLogZero) {
      throw InfeasibleTarget(
          "target sequence " + std::to_string(t) + " has zero probability", t);
    }
    const auto& a = alphas[t].log;
    const auto& b = betas[t].log;
    const auto& lp = labels[t];
    for (int i = 0; i < x.height(); ++i) {
      for (int j = 0; j < x.width(); ++j) {
        for (int s = 0; s < lp.size(); ++s) {
          double ab = a.at(i, j, s) + b.at(i, j, s);
          if (ab == kLogZero) continue;
          occ.gamma.at(i, j, lp[s]) += std::exp(ab - norm);
        }
      }
    }
  }
  return occ;
}

}  // namespace

ForwardResult forward(const ProbGrid& x, const LabelSequence& l,
                      const LambdaParams& lambda, GridCheck check) {
  lambda.validate();
  check_grid(x, check);
  check_label(x, l, 0);
  ExtendedLabel lp = extend_label(l);
  Lattice lat = make_lattice(x, lp, lambda);
  AlphaTensor alpha = run_forward(lat);
  double lp_final = final_log_prob(alpha);
  return ForwardResult{std::move(alpha), lp_final};
}

BetaTensor backward(const ProbGrid& x, const LabelSequence& l,
                    const LambdaParams& lambda, GridCheck check) {
  lambda.validate();
  check_grid(x, check);
  check_label(x, l, 0);
  ExtendedLabel lp = extend_label(l);
  return run_backward(make_lattice(x, lp, lambda));
}

double sequence_log_prob(const ProbGrid& x, const LabelSequence& l,
                         const LambdaParams& lambda, GridCheck check) {
  return forward(x, l, lambda, check).log_prob;
}

SetLoss set_loss(const ProbGrid& x, const TargetSet& targets,
                 const LambdaParams& lambda, SetLossVariant variant,
                 GridCheck check) {
  lambda.validate();
  check_grid(x, check);
  const auto& seqs = targets.sequences();
  for (std::size_t t = 0; t < seqs.size(); ++t) check_label(x, seqs[t], t);
  SetLoss out;
  out.log_probs.reserve(seqs.size());
  for (const auto& l : seqs) {
    ExtendedLabel lp = extend_label(l);
    out.log_probs.push_back(
        final_log_prob(run_forward(make_lattice(x, lp, lambda))));
  }
  out.loss = loss_from_log_probs(out.log_probs, variant);
  return out;
}

LossGradient grad_wrt_probs(const ProbGrid& x, const TargetSet& targets,
                            const LambdaParams& lambda, SetLossVariant variant,
                            GridCheck check) {
  Occupancy occ = occupancy(x, targets, lambda, variant, check);
  GridGradient g = std::move(occ.gamma);
  auto gd = g.data();
  auto xd = x.data();
  for (std::size_t n = 0; n < gd.size(); ++n) {
    gd[n] = gd[n] == 0.0 ? 0.0 : -gd[n] / std::max(xd[n], kProbFloor);
  }
  double loss = loss_from_log_probs(occ.log_probs, variant);
  return LossGradient{loss, std::move(occ.log_probs), std::move(g)};
}

LossGradient grad_wrt_logits(const LogitsGrid& z, const TargetSet& targets,
                             const LambdaParams& lambda,
                             SetLossVariant variant) {
  ProbGrid x = softmax_grid(z);
  Occupancy occ = occupancy(x, targets, lambda, variant, GridCheck::kRelaxed);
  // With g = -gamma / x, the softmax Jacobian gives x_k * sum(gamma) - gamma_k.
  GridGradient g(z.shape());
  for (int i = 0; i < z.height(); ++i) {
    for (int j = 0; j < z.width(); ++j) {
      auto gamma = occ.gamma.cell(i, j);
      auto p = x.cell(i, j);
      double total = 0.0;
      for (double v : gamma) total += v;
      auto out = g.cell(i, j);
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = p[k] * total - gamma[k];
      }
    }
  }
  double loss = loss_from_log_probs(occ.log_probs, variant);
  return LossGradient{loss, std::move(occ.log_probs), std::move(g)};
}

void write_alpha_beta_csv(std::ostream& os, const AlphaTensor& alpha,
                          const BetaTensor& beta) {
  const auto& a = alpha.log;
  const auto& b = beta.log;
  if (a.height() != b.height() || a.width() != b.width() ||
      a.states() != b.states()) {
    throw InvalidInput("alpha and beta tensors have different shapes");
  }
  auto fmt = [](double v) {
    if (v == kLogZero) return std::string("-inf");
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  os << "i,j,s,log_alpha,log_beta\n";
  for (int i = 0; i < a.height(); ++i) {
    for (int j = 0; j < a.width(); ++j) {
      for (int s = 0; s < a.states(); ++s) {
        os << i << ',' << j << ',' << s << ',' << fmt(a.at(i, j, s)) << ','
           << fmt(b.at(i, j, s)) << '\n';
      }
    }
  }
}

}  // namespace msra
