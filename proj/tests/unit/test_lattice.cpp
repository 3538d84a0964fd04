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
#include <sstream>

#include "doctest.h"
#include "msra/lattice.hpp"
#include "msra/logspace.hpp"
#include "msra/oracle.hpp"

using namespace msra;

namespace {

// The two-cell row used by several examples: x0 = (0.5, 0.5), x1 = (0.2, 0.8).
ProbGrid two_cells(int h, int w) {
  return ProbGrid(GridShape{h, w, 2}, std::vector<double>{0.5, 0.5, 0.2, 0.8});
}

double prob(const ProbGrid& x, std::vector<int> l, LambdaParams lambda,
            GridCheck check = GridCheck::kValidated) {
  return std::exp(sequence_log_prob(x, LabelSequence(std::move(l)), lambda, check));
}

}  // namespace

TEST_CASE("feasibility bounds") {
  CHECK_FALSE(feasible(0, 0, 0, 7, 2, 2));
  CHECK_FALSE(feasible(0, 0, 2, 7, 2, 2));
  CHECK(feasible(0, 0, 1, 7, 2, 2));
  CHECK(feasible(2, 2, 6, 7, 3, 3));
  // A three-cell path must end exactly on the last character.
  CHECK(feasible(1, 1, 5, 7, 2, 2));
  CHECK_FALSE(feasible(1, 1, 6, 7, 2, 2));
  CHECK_FALSE(feasible(1, 1, 4, 7, 2, 2));
  CHECK(min_path_cells(std::vector<int>{1, 1, 2}) == 4);
  CHECK(min_path_cells(std::vector<int>{1, 2, 1}) == 3);
}

TEST_CASE("small grids by hand") {
  const ProbGrid one(GridShape{1, 1, 3}, std::vector<double>{0.2, 0.5, 0.3});
  CHECK(prob(one, {1}, {}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(prob(one, {2}, {}) == doctest::Approx(0.3).epsilon(1e-15));

  CHECK(prob(two_cells(1, 2), {1}, {1.0, 0.0}) ==
        doctest::Approx(0.9).epsilon(1e-15));
  CHECK(prob(two_cells(1, 2), {1}, {0.9, 0.1}) ==
        doctest::Approx(0.81).epsilon(1e-15));
  CHECK(prob(two_cells(2, 1), {1}, {0.9, 0.1}) ==
        doctest::Approx(0.09).epsilon(1e-15));
}

TEST_CASE("alpha initialisation and beta terminal pattern") {
  oracle::InstanceGenerator gen(5);
  const ProbGrid x = gen.random_grid(3, 3, 4);
  const LabelSequence l({2, 3});
  const auto fwd = forward(x, l, {});
  CHECK(fwd.alpha.log.at(0, 0, 0) == doctest::Approx(std::log(x.at(0, 0, 0))));
  CHECK(fwd.alpha.log.at(0, 0, 1) == doctest::Approx(std::log(x.at(0, 0, 2))));
  for (int s = 2; s < 5; ++s) CHECK(fwd.alpha.log.at(0, 0, s) == kLogZero);

  const auto bwd = backward(x, l, {});
  CHECK(bwd.log.at(2, 2, 4) == 0.0);
  CHECK(bwd.log.at(2, 2, 3) == 0.0);
  for (int s = 0; s < 3; ++s) CHECK(bwd.log.at(2, 2, s) == kLogZero);

  // beta at (0,0) for the two-cell row: continue "a" with blank or "a".
  const auto b2 = backward(two_cells(1, 2), LabelSequence({1}), {1.0, 0.0});
  CHECK(std::exp(b2.log.at(0, 0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("boundary rules zero unreachable states") {
  oracle::InstanceGenerator gen(9);
  const ProbGrid x = gen.random_grid(2, 3, 4);
  const LabelSequence l({1, 2, 3});
  const auto fwd = forward(x, l, {});
  const auto bwd = backward(x, l, {});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int s = 0; s < 7; ++s) {
        if (!feasible(i, j, s, 7, 2, 3)) {
          CHECK(fwd.alpha.log.at(i, j, s) == kLogZero);
          CHECK(bwd.log.at(i, j, s) == kLogZero);
        }
      }
    }
  }
}

TEST_CASE("random 2x2 grid matches the oracle") {
  oracle::InstanceGenerator gen(11);
  for (int t = 0; t < 20; ++t) {
    const ProbGrid x = gen.random_grid(2, 2, 3);
    const std::vector<int> l{1, 2};
    const double bf = oracle::brute_force_sequence_prob(x, l, {});
    CHECK(prob(x, l, {}) == doctest::Approx(bf).epsilon(1e-12));
  }
}

TEST_CASE("transpose symmetry and log p <= 0") {
  oracle::InstanceGenerator gen(13);
  for (int t = 0; t < 30; ++t) {
    const oracle::Instance inst = gen.next();
    const LambdaParams lambda{0.7, 0.3};
    const double a = sequence_log_prob(inst.grid, LabelSequence(inst.labels), lambda);
    const double b = sequence_log_prob(transpose(inst.grid),
                                       LabelSequence(inst.labels), lambda.swapped());
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(a <= 1e-12);
  }
}

TEST_CASE("raising a matched emission never lowers p") {
  oracle::InstanceGenerator gen(17);
  for (int t = 0; t < 30; ++t) {
    oracle::Instance inst = gen.next();
    const double before = prob(inst.grid, inst.labels, {}, GridCheck::kRelaxed);
    const int i = gen.uniform_int(0, inst.grid.height() - 1);
    const int j = gen.uniform_int(0, inst.grid.width() - 1);
    inst.grid.at(i, j, inst.labels[0]) *= 1.5;
    const double after = prob(inst.grid, inst.labels, {}, GridCheck::kRelaxed);
    CHECK(after >= before * (1 - 1e-14));
  }
}

TEST_CASE("infeasible and invalid inputs") {
  const ProbGrid x(GridShape{2, 2, 3}, 1.0 / 3.0);
  CHECK_THROWS_AS(forward(x, LabelSequence({1, 2, 1, 2}), {}), InfeasibleTarget);
  // "aa" needs a blank between the repeats: 3 cells, and 2x2 has 3.
  CHECK_NOTHROW(forward(x, LabelSequence({1, 1}), {}));
  CHECK_THROWS_AS(forward(x, LabelSequence({1, 1, 1}), {}), InfeasibleTarget);
  CHECK_THROWS_AS(forward(x, LabelSequence({3}), {}), InvalidInput);

  try {
    set_loss(x, TargetSet({LabelSequence({1}), LabelSequence({1, 2, 1, 2})}), {});
    FAIL("expected InfeasibleTarget");
  } catch (const InfeasibleTarget& e) {
    CHECK(e.sequence_index() == 1);
  }

  ProbGrid bad = x;
  bad.at(0, 0, 0) = 0.5;
  CHECK_THROWS_AS(forward(bad, LabelSequence({1}), {}), InvalidInput);
  CHECK_NOTHROW(forward(bad, LabelSequence({1}), {}, GridCheck::kRelaxed));
  CHECK_THROWS_AS(forward(x, LabelSequence({1}), {-0.1, 1.0}), InvalidInput);
}

TEST_CASE("set loss") {
  const ProbGrid x(GridShape{1, 1, 3}, std::vector<double>{0.0, 0.9, 0.1});
  const TargetSet a({LabelSequence({1})});
  CHECK(set_loss(x, a, {}).loss == doctest::Approx(-std::log(0.9)));

  const TargetSet ab({LabelSequence({1}), LabelSequence({2})});
  CHECK(set_loss(x, ab, {}).loss == doctest::Approx(-std::log(0.5)).epsilon(1e-14));
  CHECK(set_loss(x, ab, {}, SetLossVariant::kSumLog).loss ==
        doctest::Approx(-std::log(0.9) - std::log(0.1)));

  const ProbGrid flat(GridShape{1, 1, 3}, std::vector<double>{0.2, 0.4, 0.4});
  CHECK(set_loss(flat, ab, {}).loss == doctest::Approx(-std::log(0.4)));

  // Order of the targets does not matter.
  oracle::InstanceGenerator gen(19);
  const ProbGrid r = gen.random_grid(3, 4, 4);
  const TargetSet fwd_order({LabelSequence({1, 2}), LabelSequence({3})});
  const TargetSet rev_order({LabelSequence({3}), LabelSequence({1, 2})});
  CHECK(set_loss(r, fwd_order, {}).loss ==
        doctest::Approx(set_loss(r, rev_order, {}).loss).epsilon(1e-15));
}

TEST_CASE("gradients on a single cell") {
  const ProbGrid x(GridShape{1, 1, 3}, std::vector<double>{0.3, 0.5, 0.2});
  const auto g = grad_wrt_probs(x, TargetSet({LabelSequence({1})}), {});
  CHECK(g.gradient.at(0, 0, 1) == doctest::Approx(-1.0 / 0.5));
  CHECK(g.gradient.at(0, 0, 0) == 0.0);
  CHECK(g.gradient.at(0, 0, 2) == 0.0);
}

TEST_CASE("gradient signs and logit gradient sums") {
  oracle::InstanceGenerator gen(23);
  for (int t = 0; t < 20; ++t) {
    const oracle::Instance inst = gen.next();
    const TargetSet targets({LabelSequence(inst.labels)});
    const auto gp = grad_wrt_probs(inst.grid, targets, {});
    for (double v : gp.gradient.data()) CHECK(v <= 0.0);

    LogitsGrid z(inst.grid.shape());
    for (std::size_t n = 0; n < z.data().size(); ++n) {
      z.data()[n] = std::log(inst.grid.data()[n]) + 0.1 * double(n % 3);
    }
    const auto gz = grad_wrt_logits(z, targets, {});
    for (int i = 0; i < z.height(); ++i) {
      for (int j = 0; j < z.width(); ++j) {
        double sum = 0.0;
        for (double v : gz.gradient.cell(i, j)) sum += v;
        CHECK(std::abs(sum) <= 1e-10);
      }
    }
  }
}

TEST_CASE("random 2x3 gradients against finite differences") {
  oracle::InstanceGenerator gen(29);
  const ProbGrid x = gen.random_grid(2, 3, 3);
  const TargetSet targets({LabelSequence({1, 2}), LabelSequence({2})});
  const auto g = grad_wrt_probs(x, targets, {}, SetLossVariant::kMeanProbability,
                                GridCheck::kRelaxed);
  const auto num = oracle::finite_diff_grad(
      [&](std::span<const double> v) {
        return set_loss(ProbGrid(x.shape(), {v.begin(), v.end()}), targets, {},
                        SetLossVariant::kMeanProbability, GridCheck::kRelaxed)
            .loss;
      },
      x.data(), 1e-6);
  for (std::size_t n = 0; n < num.values.size(); ++n) {
    CHECK(oracle::relative_error(g.gradient.data()[n], num.values[n], 1e-3) < 1e-5);
  }

  // The sum-log variant has its own gradient.
  const auto gs = grad_wrt_probs(x, targets, {}, SetLossVariant::kSumLog,
                                 GridCheck::kRelaxed);
  const auto ns = oracle::finite_diff_grad(
      [&](std::span<const double> v) {
        return set_loss(ProbGrid(x.shape(), {v.begin(), v.end()}), targets, {},
                        SetLossVariant::kSumLog, GridCheck::kRelaxed)
            .loss;
      },
      x.data(), 1e-6);
  for (std::size_t n = 0; n < ns.values.size(); ++n) {
    CHECK(oracle::relative_error(gs.gradient.data()[n], ns.values[n], 1e-3) < 1e-5);
  }
}

TEST_CASE("alpha/beta CSV") {
  const auto fwd = forward(two_cells(1, 2), LabelSequence({1}), {});
  const auto bwd = backward(two_cells(1, 2), LabelSequence({1}), {});
  std::ostringstream os;
  write_alpha_beta_csv(os, fwd.alpha, bwd);
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 2 * 3);
  CHECK(lines[0] == "i,j,s,log_alpha,log_beta");
  CHECK(lines[3].rfind("0,0,2,-inf,", 0) == 0);
}
