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

#ifndef MSRA_METRICS_HPP_
#define MSRA_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msra {

// Levenshtein distance with unit costs.
std::size_t edit_distance(std::string_view a, std::string_view b);

// edit_distance(truth, pred) / |truth|. `truth` must be non-empty.
double normalized_edit_distance(std::string_view truth, std::string_view pred);

struct MatchedPair {
  std::size_t truth;
  // Index into the predictions; empty when the truth went unmatched.
  std::optional<std::size_t> prediction;
  double ned;
};

struct MatchReport {
  // One entry per ground-truth sequence, in input order.
  std::vector<MatchedPair> pairs;
  std::size_t exact_matches = 0;
  std::size_t truth_count = 0;
  std::size_t prediction_count = 0;
  bool image_exact = false;

  double ned_sum() const;
};

// One-to-one assignment between predictions and ground truths minimizing the
// total normalized edit distance. Identical strings are paired first; an
// unmatched truth costs 1.0.
MatchReport match_sets(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& truths);

struct DatasetMetrics {
  double ned_percent = 0.0;
  double sa_percent = 0.0;
  double ia_percent = 0.0;
  std::size_t images = 0;
  std::size_t sequences = 0;
};

DatasetMetrics aggregate(const std::vector<MatchReport>& reports);

std::string metrics_json(const DatasetMetrics& m);
void print_metrics_table(std::ostream& os, const DatasetMetrics& m);

// Minimum-cost perfect assignment on a square cost matrix (row-major).
// Returns, for every row, its assigned column.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost,
                                          std::size_t n);

}  // namespace msra

#endif  // MSRA_METRICS_HPP_
