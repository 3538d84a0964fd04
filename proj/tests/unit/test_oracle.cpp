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

#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "msra/oracle.hpp"

using namespace msra;
using namespace msra::oracle;

TEST_CASE("monotone path enumeration") {
  CHECK(enumerate_paths(1, 3).size() == 1);
  CHECK(enumerate_paths(2, 2).size() == 2);
  CHECK(enumerate_paths(3, 3).size() == 6);
  for (int h = 1; h <= 5; ++h) {
    for (int w = 1; w <= 5; ++w) {
      const auto paths = enumerate_paths(h, w);
      CHECK(paths.size() == binomial(h + w - 2, h - 1));
      std::set<std::vector<std::pair<int, int>>> seen;
      for (const auto& p : paths) {
        CHECK(p.cells.size() == static_cast<std::size_t>(h + w - 1));
        CHECK(p.right_steps == w - 1);
        CHECK(p.down_steps == h - 1);
        std::vector<std::pair<int, int>> key;
        for (std::size_t k = 0; k < p.cells.size(); ++k) {
          key.emplace_back(p.cells[k].row, p.cells[k].col);
          if (k == 0) continue;
          const int dr = p.cells[k].row - p.cells[k - 1].row;
          const int dc = p.cells[k].col - p.cells[k - 1].col;
          CHECK(dr + dc == 1);
          CHECK(dr >= 0);
          CHECK(dc >= 0);
        }
        seen.insert(key);
      }
      CHECK(seen.size() == paths.size());
    }
  }
  // C(16, 8) = 12870 exceeds the guard.
  CHECK_THROWS_AS(enumerate_paths(9, 9), GuardExceeded);
}

TEST_CASE("path weight") {
  const auto paths = enumerate_paths(2, 3);
  for (const auto& p : paths) {
    CHECK(p.weight({0.9, 0.1}) == doctest::Approx(0.9 * 0.9 * 0.1));
  }
}

TEST_CASE("1D CTC reference") {
  CHECK(ctc1d_forward({{0.3, 0.7}}, std::vector<int>{1}) == doctest::Approx(0.7));
  CHECK(ctc1d_forward({{0.5, 0.5}, {0.2, 0.8}}, std::vector<int>{1}) ==
        doctest::Approx(0.9));
  CHECK(ctc1d_forward({{0.5, 0.5}}, std::vector<int>{1, 1}) == 0.0);

  InstanceGenerator gen(31);
  for (int t = 0; t < 100; ++t) {
    const int steps = gen.uniform_int(1, 5);
    const int q = gen.uniform_int(2, 4);
    const ProbGrid g = gen.random_grid(1, steps, q);
    Sequence1D seq;
    for (int j = 0; j < steps; ++j) {
      const auto c = g.cell(0, j);
      seq.emplace_back(c.begin(), c.end());
    }
    const auto l = gen.random_label(1, steps, q);
    CHECK(ctc1d_forward(seq, l) ==
          doctest::Approx(ctc1d_enumerate(seq, l)).epsilon(1e-12));
  }
}

TEST_CASE("brute-force sequence probability") {
  InstanceGenerator gen(37);
  const ProbGrid row = gen.random_grid(1, 4, 3);
  Sequence1D seq;
  for (int j = 0; j < 4; ++j) {
    const auto c = row.cell(0, j);
    seq.emplace_back(c.begin(), c.end());
  }
  const std::vector<int> l{1, 2};
  CHECK(brute_force_sequence_prob(row, l, {0.9, 0.1}) ==
        doctest::Approx(std::pow(0.9, 3) * ctc1d_forward(seq, l)));

  const ProbGrid uniform(GridShape{2, 2, 3}, 1.0 / 3.0);
  CHECK(brute_force_sequence_prob(uniform, l, {0.8, 0.2}) ==
        doctest::Approx(brute_force_sequence_prob(uniform, l, {0.2, 0.8})));
}

TEST_CASE("total mass") {
  const ProbGrid one(GridShape{1, 1, 3}, std::vector<double>{0.2, 0.3, 0.5});
  CHECK(brute_force_total_prob(one, {0.5, 0.5}).total == doctest::Approx(1.0));

  // Cells sum to one, so the total is the summed path weight.
  InstanceGenerator gen(41);
  const ProbGrid x = gen.random_grid(2, 3, 3);
  const LambdaParams lambda{0.6, 0.3};
  double weights = 0.0;
  for (const auto& p : enumerate_paths(2, 3)) weights += p.weight(lambda);
  const TotalMass m = brute_force_total_prob(x, lambda, true);
  CHECK(m.total == doctest::Approx(weights).epsilon(1e-12));
  double grouped = 0.0;
  for (const auto& [seq, p] : m.by_sequence) grouped += p;
  CHECK(grouped == doctest::Approx(m.total).epsilon(1e-12));
  CHECK(m.by_sequence.count({}) == 1);
}

TEST_CASE("finite differences") {
  const std::vector<double> point{1.5, -2.0};
  const auto id = finite_diff_grad(
      [](std::span<const double> v) { return v[0]; }, point, 1e-6);
  CHECK(id.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(id.values[1]) < 1e-12);
  const auto flat = finite_diff_grad(
      [](std::span<const double>) { return 4.0; }, point, 1e-6);
  CHECK(flat.values[0] == 0.0);
  const auto bad = finite_diff_grad(
      [](std::span<const double> v) {
        return v[1] == -2.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
      }, point, 1e-6);
  CHECK(bad.non_finite == std::vector<std::size_t>{1});
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0 + 1e-10) == doctest::Approx(1e-10));
  CHECK(relative_error(1e-9, 2e-9, 1e-3) == doctest::Approx(1e-6));
}
