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

#include "doctest.h"
#include "msra/core.hpp"

using namespace msra;

namespace {

const Alphabet kAb("-ab");

std::vector<int> idx(const std::string& s) {
  std::vector<int> out;
  for (char c : s) out.push_back(kAb.index(c));
  return out;
}

std::string text(const std::vector<int>& v) { return kAb.render(v); }

}  // namespace

TEST_CASE("alphabet basics") {
  const Alphabet d = Alphabet::digits();
  CHECK(d.size() == 11);
  CHECK(d.index('0') == 1);
  CHECK(d.symbol(10) == '9');
  CHECK(d.encode("579") == std::vector<int>{6, 8, 10});
  CHECK_THROWS_AS(d.encode("5-7"), InvalidInput);
  CHECK_THROWS_AS(Alphabet("-"), InvalidInput);
  CHECK_THROWS_AS(Alphabet("-aa"), InvalidInput);
}

TEST_CASE("label sequences reject blanks and emptiness") {
  CHECK_THROWS_AS(LabelSequence({}), InvalidInput);
  CHECK_THROWS_AS(LabelSequence({1, 0}), InvalidInput);
  CHECK(LabelSequence({2, 1}).max_class() == 2);
  CHECK_THROWS_AS(TargetSet({}), InvalidInput);
}

TEST_CASE("extend_label") {
  CHECK(text(extend_label(idx("ab")).symbols) == "-a-b-");
  CHECK(text(extend_label(idx("a")).symbols) == "-a-");
  CHECK(text(extend_label(idx("aa")).symbols) == "-a-a-");
  CHECK_THROWS_AS(extend_label(std::vector<int>{}), InvalidInput);

  // Dropping the blanks gives the label back.
  for (const std::string s : {"a", "ab", "aab", "baba"}) {
    const auto ext = extend_label(idx(s)).symbols;
    std::vector<int> stripped;
    for (int k : ext) {
      if (k != kBlank) stripped.push_back(k);
    }
    CHECK(stripped == idx(s));
    CHECK(collapse(ext, kAb) == idx(s));
  }
}

TEST_CASE("collapse") {
  CHECK(text(collapse(idx("--aa-b"), kAb)) == "ab");
  CHECK(text(collapse(idx("aab-ba"), kAb)) == "abba");
  CHECK(collapse(idx("----"), kAb).empty());
  CHECK_THROWS_AS(collapse(std::vector<int>{0, 3}, kAb), InvalidInput);
  // Idempotent on sequences without repeats.
  const auto once = collapse(idx("ab-a-b"), kAb);
  CHECK(collapse(once, kAb) == once);
}

TEST_CASE("softmax_grid") {
  LogitsGrid z(GridShape{1, 2, 2});
  z.at(0, 0, 0) = 0.0;
  z.at(0, 0, 1) = std::log(3.0);
  z.at(0, 1, 0) = 4.0;
  z.at(0, 1, 1) = 4.0;
  const ProbGrid x = softmax_grid(z);
  CHECK(x.at(0, 0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(x.at(0, 0, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(x.at(0, 1, 0) == 0.5);
  CHECK(validate_grid(x).ok());

  LogitsGrid shifted = z;
  for (double& v : shifted.cell(0, 0)) v += 123.0;
  const ProbGrid y = softmax_grid(shifted);
  CHECK(y.at(0, 0, 1) == doctest::Approx(x.at(0, 0, 1)).epsilon(1e-14));

  // Large logits stay finite thanks to max subtraction.
  LogitsGrid big(GridShape{1, 1, 3}, std::vector<double>{1000, 999, -1000});
  CHECK(validate_grid(softmax_grid(big)).ok());

  z.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(softmax_grid(z), InvalidInput);
}

TEST_CASE("validate_grid diagnostics") {
  ProbGrid x(GridShape{2, 2, 2}, 0.5);
  CHECK(validate_grid(x).ok());

  x.at(1, 0, 0) = 0.4;
  auto d = validate_grid(x);
  REQUIRE(d.issues.size() == 1);
  CHECK(d.issues[0].kind == GridIssue::Kind::kSumDeviation);
  CHECK(d.issues[0].row == 1);
  CHECK(d.issues[0].col == 0);
  CHECK(d.issues[0].value == doctest::Approx(-0.1));
  CHECK(d.max_sum_deviation == doctest::Approx(0.1));

  x.at(1, 0, 0) = 0.5;
  x.at(0, 1, 1) = std::numeric_limits<double>::quiet_NaN();
  d = validate_grid(x);
  CHECK(d.has_non_finite);
  CHECK(d.issues[0].kind == GridIssue::Kind::kNonFinite);

  x.at(0, 1, 1) = 0.5;
  x.at(0, 0, 0) = -0.5;
  x.at(0, 0, 1) = 1.5;
  d = validate_grid(x);
  REQUIRE_FALSE(d.ok());
  CHECK(d.issues[0].kind == GridIssue::Kind::kNegativeEntry);
  CHECK(d.min_entry == -0.5);
}

TEST_CASE("transpose swaps axes") {
  ProbGrid x(GridShape{2, 3, 2});
  for (std::size_t n = 0; n < x.data().size(); ++n) x.data()[n] = double(n);
  const ProbGrid t = transpose(x);
  CHECK(t.height() == 3);
  CHECK(t.width() == 2);
  CHECK(t.at(2, 1, 1) == x.at(1, 2, 1));
  CHECK(transpose(t).data()[7] == x.data()[7]);
}
