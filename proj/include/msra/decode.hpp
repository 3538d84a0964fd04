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

// Turning a grid of per-cell distributions into a set of strings: take the
// per-cell argmax, split the class matrix into groups of line segments,
// concatenate each group and collapse it.

#ifndef MSRA_DECODE_HPP_
#define MSRA_DECODE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "msra/core.hpp"

namespace msra {

class ArgmaxGrid {
 public:
  ArgmaxGrid(int height, int width, std::vector<int> classes);
  ArgmaxGrid(int height, int width) : ArgmaxGrid(height, width, {}) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int& at(int i, int j) { return m_[index(i, j)]; }
  int at(int i, int j) const { return m_[index(i, j)]; }
  std::span<const int> data() const { return m_; }

  ArgmaxGrid transposed() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(j);
  }
  int height_;
  int width_;
  std::vector<int> m_;
};

// Ties go to the smallest class index, so flat cells decode as blank.
ArgmaxGrid argmax_grid(const ProbGrid& x);

enum class Axis { kRow, kColumn };

// Inclusive span [start, end] of one row (or one column) of the matrix.
struct Segment {
  Axis axis = Axis::kRow;
  int line = 0;
  int start = 0;
  int end = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct GroupingStrategy {
  enum class Kind { kRows, kColumns, kRowsAndColumns, kMergedRows };
  Kind kind = Kind::kRows;
  // kMergedRows only: up to this many empty rows may separate two rows that
  // still belong to the same sequence.
  int merge_gap = 0;

  static GroupingStrategy rows() { return {Kind::kRows, 0}; }
  static GroupingStrategy columns() { return {Kind::kColumns, 0}; }
  static GroupingStrategy rows_and_columns() {
    return {Kind::kRowsAndColumns, 0};
  }
  static GroupingStrategy merged_rows(int gap = 0) {
    return {Kind::kMergedRows, gap};
  }

  std::string name() const;
  static GroupingStrategy parse(std::string_view name);
};

struct DecodedSequence {
  LabelSequence labels;
  std::vector<Segment> segments;
};

struct DecodeResult {
  std::vector<DecodedSequence> sequences;

  std::vector<std::string> strings(const Alphabet& alphabet) const;
};

DecodeResult decode_with_strategy(const ArgmaxGrid& m,
                                  const GroupingStrategy& strategy,
                                  const Alphabet& alphabet);

struct StrategySample {
  ArgmaxGrid matrix;
  TargetSet targets;
};

struct StrategyScore {
  GroupingStrategy strategy;
  double score;
};

struct StrategySelection {
  GroupingStrategy best;
  double score;
  std::vector<StrategyScore> all;
};

// Mean over every ground-truth sequence of the smallest normalized edit
// distance to any decoded sequence of its sample (1.0 when nothing decodes).
double strategy_score(const GroupingStrategy& strategy,
                      std::span<const StrategySample> samples,
                      const Alphabet& alphabet);

// Lowest score wins; ties keep the earlier candidate.
StrategySelection select_strategy(
    std::span<const GroupingStrategy> candidates,
    std::span<const StrategySample> samples, const Alphabet& alphabet);

}  // namespace msra

#endif  // MSRA_DECODE_HPP_
