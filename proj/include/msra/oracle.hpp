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

// Brute-force references for the lattice. Everything here works in linear
// space by explicit enumeration and shares no code with lattice.cpp.

#ifndef MSRA_ORACLE_HPP_
#define MSRA_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "msra/core.hpp"
#include "msra/lambda_params.hpp"

namespace msra::oracle {

// Enumeration would exceed its size guard.
class GuardExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t kMaxPaths = 10'000;
inline constexpr std::uint64_t kMaxLabelings = 1'000'000;

struct Cell {
  int row;
  int col;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct MonotonePath {
  std::vector<Cell> cells;
  int right_steps = 0;
  int down_steps = 0;

  double weight(const LambdaParams& lambda) const;
};

std::uint64_t binomial(int n, int k);

std::vector<MonotonePath> enumerate_paths(int height, int width);

// Per-step class distributions for a one-dimensional CTC problem.
using Sequence1D = std::vector<std::vector<double>>;

// Standard CTC forward probability of `labels` over `probs`. Returns 0 when
// no alignment fits; throws only for malformed input.
double ctc1d_forward(const Sequence1D& probs, std::span<const int> labels);

// Same quantity by summing every Q^T labeling whose collapse is `labels`.
double ctc1d_enumerate(const Sequence1D& probs, std::span<const int> labels);

// Sum over monotone paths of (transition weight) x (1D CTC along the path).
double brute_force_sequence_prob(const ProbGrid& x,
                                 std::span<const int> labels,
                                 const LambdaParams& lambda);

struct TotalMass {
  double total = 0.0;
  // Mass per collapsed sequence (the empty sequence included). Only filled
  // when grouping was requested.
  std::map<std::vector<int>, double> by_sequence;
};

// Mass of every (path, per-cell labeling) pair.
TotalMass brute_force_total_prob(const ProbGrid& x, const LambdaParams& lambda,
                                 bool group_by_sequence = false);

struct NumericGradient {
  std::vector<double> values;
  std::vector<std::size_t> non_finite;
};

// Central differences (f(x + eps e_n) - f(x - eps e_n)) / 2 eps.
NumericGradient finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> point, double eps);

// |a - b| / max(|a|, |b|, floor). Entries below `floor` are compared
// absolutely.
double relative_error(double a, double b, double floor = 1e-300);

// Random certification instances. Fixed seeds make every failure
// reproducible from the reported trial index.
struct InstanceLimits {
  int max_height = 4;
  int max_width = 4;
  int min_classes = 2;
  int max_classes = 4;
  int max_label = 3;
  // Smallest cell entry before normalisation; keeps brute-force sums well
  // away from underflow.
  double min_entry = 0.05;
};

struct Instance {
  ProbGrid grid;
  std::vector<int> labels;
};

class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed, InstanceLimits limits = {})
      : rng_(seed), limits_(limits) {}

  ProbGrid random_grid(int height, int width, int classes);
  // Label of length in [1, max_label] that fits the grid.
  std::vector<int> random_label(int height, int width, int classes);
  Instance next();
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 rng_;
  InstanceLimits limits_;
};

}  // namespace msra::oracle

#endif  // MSRA_ORACLE_HPP_
