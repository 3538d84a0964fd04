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

#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "msra/decode.hpp"

using namespace msra;

namespace {

const Alphabet kDigits = Alphabet::digits();

std::vector<std::string> decode(const ArgmaxGrid& m, GroupingStrategy s) {
  auto out = decode_with_strategy(m, s, kDigits).strings(kDigits);
  std::sort(out.begin(), out.end());
  return out;
}

// Class index of a digit character.
int c(char d) { return kDigits.index(d); }

}  // namespace

TEST_CASE("argmax with ties toward blank") {
  ProbGrid x(GridShape{1, 3, 3});
  const double cells[3][3] = {{1 / 3.0, 1 / 3.0, 1 / 3.0},
                              {0.1, 0.7, 0.2},
                              {0.2, 0.4, 0.4}};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) x.at(0, j, k) = cells[j][k];
  }
  const ArgmaxGrid m = argmax_grid(x);
  CHECK(m.at(0, 0) == 0);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(0, 2) == 1);
}

TEST_CASE("rows strategy") {
  const ArgmaxGrid m(2, 4, {0, c('0'), c('0'), 0, 0, c('4'), 0, c('8')});
  CHECK(decode(m, GroupingStrategy::rows()) == std::vector<std::string>{"0", "48"});
  CHECK(decode(ArgmaxGrid(3, 3), GroupingStrategy::rows()).empty());
}

TEST_CASE("two-sequence fixture") {
  std::ifstream in(std::string(MSRA_FIXTURE_DIR) + "/decode_grid.json");
  REQUIRE(in);
  const auto j = nlohmann::json::parse(in);
  const ProbGrid x({j["h"].get<int>(), j["w"].get<int>(), j["q"].get<int>()},
                   j["probs"].get<std::vector<double>>());
  const ArgmaxGrid m = argmax_grid(x);
  CHECK(m.at(0, 1) == c('1'));
  CHECK(m.at(2, 6) == c('9'));
  const auto rows = decode_with_strategy(m, GroupingStrategy::rows(), kDigits);
  CHECK(rows.strings(kDigits) == std::vector<std::string>{"12", "579"});
  REQUIRE(rows.sequences[1].segments.size() == 1);
  CHECK(rows.sequences[1].segments[0] == Segment{Axis::kRow, 2, 0, 7});
}

TEST_CASE("columns equal rows of the transpose") {
  const ArgmaxGrid m(3, 4, {c('1'), 0, c('2'), c('2'),
                            c('1'), c('3'), 0, c('2'),
                            0, c('3'), c('5'), 0});
  CHECK(decode(m, GroupingStrategy::columns()) ==
        decode(m.transposed(), GroupingStrategy::rows()));
  CHECK(decode(m, GroupingStrategy::columns()) ==
        std::vector<std::string>{"1", "2", "25", "3"});
}

TEST_CASE("rows-and-columns deduplicates by string") {
  // One glyph: its row and its column both decode to "7".
  ArgmaxGrid m(3, 3);
  m.at(1, 1) = c('7');
  CHECK(decode(m, GroupingStrategy::rows_and_columns()) ==
        std::vector<std::string>{"7"});
}

TEST_CASE("merged rows") {
  ArgmaxGrid m(5, 3);
  m.at(0, 0) = c('1');
  m.at(1, 1) = c('2');
  m.at(3, 2) = c('3');
  CHECK(decode(m, GroupingStrategy::merged_rows()) ==
        std::vector<std::string>{"12", "3"});
  CHECK(decode(m, GroupingStrategy::merged_rows(1)) ==
        std::vector<std::string>{"123"});
}

TEST_CASE("strategy names round-trip") {
  for (const auto& s : {GroupingStrategy::rows(), GroupingStrategy::columns(),
                        GroupingStrategy::rows_and_columns(),
                        GroupingStrategy::merged_rows(),
                        GroupingStrategy::merged_rows(2)}) {
    const auto back = GroupingStrategy::parse(s.name());
    CHECK(back.kind == s.kind);
    CHECK(back.merge_gap == s.merge_gap);
  }
  CHECK_THROWS_AS(GroupingStrategy::parse("diagonal"), InvalidInput);
}

TEST_CASE("strategy selection") {
  // A horizontal "12" and a vertical "345".
  ArgmaxGrid m(4, 4);
  m.at(0, 1) = c('1');
  m.at(0, 3) = c('2');
  m.at(1, 0) = c('3');
  m.at(2, 0) = c('4');
  m.at(3, 0) = c('5');
  const std::vector<StrategySample> samples{
      {m, TargetSet::from_strings({"12", "345"}, kDigits)}};
  const std::vector<GroupingStrategy> cands{GroupingStrategy::rows(),
                                            GroupingStrategy::rows_and_columns()};
  const auto sel = select_strategy(cands, samples, kDigits);
  CHECK(sel.best.kind == GroupingStrategy::Kind::kRowsAndColumns);
  CHECK(sel.score == 0.0);
  // rows reads "12", "3", "4", "5": the vertical one is 2/3 off.
  CHECK(sel.all[0].score == doctest::Approx((0.0 + 2.0 / 3.0) / 2.0));

  const std::vector<StrategySample> flat{
      {ArgmaxGrid(2, 2), TargetSet::from_strings({"1"}, kDigits)}};
  const auto single = select_strategy(
      std::vector<GroupingStrategy>{GroupingStrategy::columns()}, flat, kDigits);
  CHECK(single.best.kind == GroupingStrategy::Kind::kColumns);
  CHECK(single.score == 1.0);

  // Ties keep the first candidate.
  const std::vector<StrategySample> one_row{
      {ArgmaxGrid(1, 3, {c('1'), 0, c('2')}), TargetSet::from_strings({"12"}, kDigits)}};
  const auto tie = select_strategy(
      std::vector<GroupingStrategy>{GroupingStrategy::merged_rows(),
                                    GroupingStrategy::rows()},
      one_row, kDigits);
  CHECK(tie.best.kind == GroupingStrategy::Kind::kMergedRows);
  CHECK_THROWS_AS(select_strategy(std::vector<GroupingStrategy>{}, one_row, kDigits),
                  InvalidInput);
}
