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

#include "msra/certify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "msra/lattice.hpp"

namespace msra::certify {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string describe(const ProbGrid& x, std::span<const int> labels) {
  std::ostringstream os;
  os << x.height() << "x" << x.width() << "x" << x.classes() << " label [";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    os << (k ? "," : "") << labels[k];
  }
  os << "]";
  return os.str();
}

void note(Report& r, double err, int trial, const std::string& what) {
  if (err > r.max_rel_err || r.worst_trial < 0) {
    r.max_rel_err = std::max(r.max_rel_err, err);
    r.worst_trial = trial;
    r.worst = what;
  }
}

}  // namespace

Report oracle_suite(int trials, std::uint64_t seed, const LambdaParams& lambda,
                    const oracle::InstanceLimits& limits) {
  const auto t0 = Clock::now();
  oracle::InstanceGenerator gen(seed, limits);
  Report r;
  for (int t = 0; t < trials; ++t) {
    const oracle::Instance inst = gen.next();
    const double dp = std::exp(
        sequence_log_prob(inst.grid, LabelSequence(inst.labels), lambda));
    const double bf =
        oracle::brute_force_sequence_prob(inst.grid, inst.labels, lambda);
    note(r, oracle::relative_error(dp, bf), t, describe(inst.grid, inst.labels));
  }
  r.trials = trials;
  r.seconds = elapsed(t0);
  return r;
}

GradientReport gradient_suite(int trials, std::uint64_t seed,
                              const LambdaParams& lambda, double eps,
                              const oracle::InstanceLimits& limits) {
  const auto t0 = Clock::now();
  oracle::InstanceGenerator gen(seed, limits);
  GradientReport out;
  for (int t = 0; t < trials; ++t) {
    oracle::Instance inst = gen.next();
    const GridShape shape = inst.grid.shape();
    std::vector<LabelSequence> seqs{LabelSequence(inst.labels)};
    if (gen.uniform_int(0, 1) == 1) {
      seqs.emplace_back(gen.random_label(shape.height, shape.width, shape.classes));
    }
    const TargetSet targets(seqs);
    const std::string what = describe(inst.grid, inst.labels) +
                             " targets=" + std::to_string(targets.size());

    const LossGradient gp = grad_wrt_probs(
        inst.grid, targets, lambda, SetLossVariant::kMeanProbability,
        GridCheck::kRelaxed);
    const auto loss_of_probs = [&](std::span<const double> v) {
      const ProbGrid x(shape, std::vector<double>(v.begin(), v.end()));
      return set_loss(x, targets, lambda, SetLossVariant::kMeanProbability,
                      GridCheck::kRelaxed)
          .loss;
    };
    const oracle::NumericGradient np =
        oracle::finite_diff_grad(loss_of_probs, inst.grid.data(), eps);
    for (std::size_t n = 0; n < np.values.size(); ++n) {
      note(out.probs,
           oracle::relative_error(gp.gradient.data()[n], np.values[n],
                                  kGradientFloor),
           t, what);
    }
    if (!np.non_finite.empty()) note(out.probs, INFINITY, t, what + " non-finite");

    LogitsGrid z(shape);
    for (std::size_t n = 0; n < z.data().size(); ++n) {
      z.data()[n] = std::log(inst.grid.data()[n]);
    }
    const LossGradient gz = grad_wrt_logits(z, targets, lambda);
    const auto loss_of_logits = [&](std::span<const double> v) {
      const LogitsGrid zz(shape, std::vector<double>(v.begin(), v.end()));
      return set_loss(softmax_grid(zz), targets, lambda).loss;
    };
    const oracle::NumericGradient nz =
        oracle::finite_diff_grad(loss_of_logits, z.data(), eps);
    for (std::size_t n = 0; n < nz.values.size(); ++n) {
      note(out.logits,
           oracle::relative_error(gz.gradient.data()[n], nz.values[n],
                                  kGradientFloor),
           t, what);
    }
    if (!nz.non_finite.empty()) {
      note(out.logits, INFINITY, t, what + " non-finite");
    }
  }
  out.probs.trials = out.logits.trials = trials;
  out.probs.seconds = out.logits.seconds = elapsed(t0);
  return out;
}

}  // namespace msra::certify
