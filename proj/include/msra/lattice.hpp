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

// Two-dimensional CTC lattice.
//
// A labeling of the grid is a monotone path from (0, 0) to (H-1, W-1) taking
// right or down steps, plus one class per visited cell. Its probability is
// the product of the visited cell emissions times one transition weight per
// step; p(l | X) sums every labeling whose collapse is l. alpha/beta below are
// the usual CTC prefix/suffix sums over that space, kept in log space:
//
//   alpha[i,j](s) = x[i,j](l'_s) * ( h * G(alpha[i,j-1], s)
//                                   + v * G(alpha[i-1,j], s) )
//   G(a, s)       = a(s) + a(s-1) + [l'_s != blank, l'_s != l'_{s-2}] a(s-2)
//
// beta mirrors this from the bottom-right corner and excludes the emission
// of its own cell, so sum_s alpha*beta over any anti-diagonal equals p(l|X).

#ifndef MSRA_LATTICE_HPP_
#define MSRA_LATTICE_HPP_

#include <iosfwd>
#include <vector>

#include "msra/core.hpp"
#include "msra/lambda_params.hpp"

namespace msra {

// The label cannot be matched by any path of the grid.
class InfeasibleTarget : public Error {
 public:
  InfeasibleTarget(const std::string& what, std::size_t sequence_index)
      : Error(what), sequence_index_(sequence_index) {}
  std::size_t sequence_index() const { return sequence_index_; }

 private:
  std::size_t sequence_index_;
};

// H x W x S array of log values initialised to log 0.
class LogTensor {
 public:
  LogTensor(int height, int width, int states);

  int height() const { return height_; }
  int width() const { return width_; }
  int states() const { return states_; }

  double& at(int i, int j, int s) { return v_[index(i, j, s)]; }
  double at(int i, int j, int s) const { return v_[index(i, j, s)]; }

 private:
  std::size_t index(int i, int j, int s) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(states_) +
           static_cast<std::size_t>(s);
  }

  int height_;
  int width_;
  int states_;
  std::vector<double> v_;
};

struct AlphaTensor {
  ExtendedLabel label;
  LogTensor log;
};

struct BetaTensor {
  ExtendedLabel label;
  LogTensor log;
};

// kRelaxed accepts any finite non-negative grid; it exists for gradient
// checks that perturb entries independently.
enum class GridCheck { kValidated, kRelaxed };

// Whether position s of an extended label of length `extended_len` can be
// occupied at cell (i, j) by some complete path.
bool feasible(int i, int j, int s, int extended_len, int height, int width);

// Fewest path cells able to emit `labels`: one per label plus a blank between
// equal neighbours.
int min_path_cells(std::span<const int> labels);

struct ForwardResult {
  AlphaTensor alpha;
  double log_prob;
};

ForwardResult forward(const ProbGrid& x, const LabelSequence& l,
                      const LambdaParams& lambda,
                      GridCheck check = GridCheck::kValidated);

BetaTensor backward(const ProbGrid& x, const LabelSequence& l,
                    const LambdaParams& lambda,
                    GridCheck check = GridCheck::kValidated);

double sequence_log_prob(const ProbGrid& x, const LabelSequence& l,
                         const LambdaParams& lambda,
                         GridCheck check = GridCheck::kValidated);

enum class SetLossVariant {
  // -ln( mean_i p(l_i | X) ), the multi-sequence objective.
  kMeanProbability,
  // -sum_i ln p(l_i | X). Experimental; not the multi-sequence objective.
  kSumLog,
};

struct SetLoss {
  double loss;
  std::vector<double> log_probs;
};

SetLoss set_loss(const ProbGrid& x, const TargetSet& targets,
                 const LambdaParams& lambda,
                 SetLossVariant variant = SetLossVariant::kMeanProbability,
                 GridCheck check = GridCheck::kValidated);

struct LossGradient {
  double loss;
  std::vector<double> log_probs;
  GridGradient gradient;
};

// d loss / d x[i,j](k), treating every grid entry as a free variable.
LossGradient grad_wrt_probs(
    const ProbGrid& x, const TargetSet& targets, const LambdaParams& lambda,
    SetLossVariant variant = SetLossVariant::kMeanProbability,
    GridCheck check = GridCheck::kValidated);

// d loss / d z through a per-cell softmax. Each cell of the result sums to 0.
LossGradient grad_wrt_logits(
    const LogitsGrid& z, const TargetSet& targets, const LambdaParams& lambda,
    SetLossVariant variant = SetLossVariant::kMeanProbability);

// CSV rows "i,j,s,log_alpha,log_beta" for every lattice entry, preceded by a
// header line. Log zero is written as -inf.
void write_alpha_beta_csv(std::ostream& os, const AlphaTensor& alpha,
                          const BetaTensor& beta);

}  // namespace msra

#endif  // MSRA_LATTICE_HPP_
