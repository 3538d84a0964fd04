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

// Seeded suites comparing the lattice against the brute-force oracle and its
// analytic gradients against finite differences. Shared by the CLI and the
// acceptance tests.

#ifndef MSRA_CERTIFY_HPP_
#define MSRA_CERTIFY_HPP_

#include <cstdint>
#include <string>

#include "msra/lambda_params.hpp"
#include "msra/oracle.hpp"

namespace msra::certify {

struct Report {
  int trials = 0;
  double max_rel_err = 0.0;
  // Trial index and a short description of the worst comparison.
  int worst_trial = -1;
  std::string worst;
  double seconds = 0.0;

  bool within(double tolerance) const { return max_rel_err <= tolerance; }
};

// forward() against brute_force_sequence_prob on random instances.
Report oracle_suite(int trials, std::uint64_t seed, const LambdaParams& lambda,
                    const oracle::InstanceLimits& limits = {});

// Entries whose analytic and numeric values are both below this are compared
// absolutely; central differences cannot resolve a relative error there.
inline constexpr double kGradientFloor = 1e-3;

struct GradientReport {
  Report probs;
  Report logits;
};

// grad_wrt_probs on a relaxed grid and grad_wrt_logits against central
// differences of set_loss. Each instance carries one or two targets.
GradientReport gradient_suite(int trials, std::uint64_t seed,
                              const LambdaParams& lambda, double eps,
                              const oracle::InstanceLimits& limits = {});

}  // namespace msra::certify

#endif  // MSRA_CERTIFY_HPP_
