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
#include <sstream>

#include "doctest.h"
#include "msra/metrics.hpp"

using namespace msra;

TEST_CASE("edit distance") {
  CHECK(edit_distance("579", "579") == 0);
  CHECK(edit_distance("579", "59") == 1);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(normalized_edit_distance("12", "13") == 0.5);
  CHECK_THROWS(normalized_edit_distance("", "1"));
}

TEST_CASE("set matching examples") {
  const MatchReport a = match_sets({"12", "579"}, {"579", "12"});
  CHECK(a.ned_sum() == 0.0);
  CHECK(a.exact_matches == 2);
  CHECK(a.image_exact);

  const MatchReport b = match_sets({"12"}, {"12", "579"});
  CHECK(b.ned_sum() / 2 == 0.5);
  CHECK(b.exact_matches == 1);
  CHECK_FALSE(b.image_exact);
  CHECK_FALSE(b.pairs[1].prediction.has_value());

  const MatchReport c = match_sets({"13", "579"}, {"12", "579"});
  CHECK(c.pairs[0].ned == 0.5);
  CHECK(c.pairs[1].ned == 0.0);
  CHECK(c.ned_sum() / 2 == 0.25);
  CHECK(c.exact_matches == 1);
}

TEST_CASE("extra predictions only cost image accuracy") {
  const MatchReport r = match_sets({"12", "579", "8"}, {"579", "12"});
  CHECK(r.ned_sum() == 0.0);
  CHECK(r.exact_matches == 2);
  CHECK_FALSE(r.image_exact);
}

TEST_CASE("matching is permutation invariant") {
  std::vector<std::string> preds{"123", "45", "6", "780"};
  const std::vector<std::string> truths{"12", "456", "78", "9"};
  const double base = match_sets(preds, truths).ned_sum();
  std::sort(preds.begin(), preds.end());
  do {
    CHECK(match_sets(preds, truths).ned_sum() == doctest::Approx(base));
  } while (std::next_permutation(preds.begin(), preds.end()));
}

TEST_CASE("assignment solver") {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto a = solve_assignment(cost, 3);
  double total = 0;
  for (std::size_t r = 0; r < 3; ++r) total += cost[r * 3 + a[r]];
  CHECK(total == 5.0);
}

TEST_CASE("aggregate") {
  const DatasetMetrics perfect = aggregate({match_sets({"1"}, {"1"})});
  CHECK(perfect.ned_percent == 0.0);
  CHECK(perfect.sa_percent == 100.0);
  CHECK(perfect.ia_percent == 100.0);

  const DatasetMetrics half = aggregate({match_sets({"12"}, {"12", "579"})});
  CHECK(half.ned_percent == 50.0);
  CHECK(half.sa_percent == 50.0);
  CHECK(half.ia_percent == 0.0);

  const DatasetMetrics empty = aggregate({match_sets({}, {"12", "579"}),
                                          match_sets({}, {"3"})});
  CHECK(empty.ned_percent == 100.0);
  CHECK(empty.sa_percent == 0.0);
  CHECK(empty.ia_percent == 0.0);
  CHECK(empty.sequences == 3);
  CHECK_THROWS(aggregate({}));

  std::ostringstream os;
  print_metrics_table(os, half);
  CHECK(os.str().find("50.00") != std::string::npos);
  CHECK(metrics_json(half).find("\"ia_percent\"") != std::string::npos);
}
