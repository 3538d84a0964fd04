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

// Alphabets, label sequences and per-cell class grids shared by the lattice,
// decoder, model and tooling.

#ifndef MSRA_CORE_HPP_
#define MSRA_CORE_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace msra {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: out-of-range class indices, empty labels, bad shapes.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

inline constexpr int kBlank = 0;

// Entries are clamped to this before taking logs.
inline constexpr double kProbFloor = 1e-30;

// Class table. Index 0 is always blank; symbols[0] is only used for display.
class Alphabet {
 public:
  explicit Alphabet(std::string symbols);

  // "-0123456789": blank followed by the ten digits.
  static Alphabet digits();

  int size() const { return static_cast<int>(symbols_.size()); }
  char symbol(int cls) const;
  int index(char c) const;
  const std::string& symbols() const { return symbols_; }

  // Text to class indices; blank's display character is rejected.
  std::vector<int> encode(std::string_view text) const;
  std::string render(std::span<const int> classes) const;

 private:
  std::string symbols_;
};

// Non-empty ordered list of non-blank class indices.
class LabelSequence {
 public:
  explicit LabelSequence(std::vector<int> labels);

  std::span<const int> labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t k) const { return labels_[k]; }
  int max_class() const;

  friend bool operator==(const LabelSequence&, const LabelSequence&) = default;
  friend auto operator<=>(const LabelSequence&, const LabelSequence&) = default;

 private:
  std::vector<int> labels_;
};

// Blank-interleaved label, blank at even positions, size 2|l|+1.
struct ExtendedLabel {
  std::vector<int> symbols;

  int size() const { return static_cast<int>(symbols.size()); }
  int operator[](int s) const { return symbols[static_cast<std::size_t>(s)]; }
};

ExtendedLabel extend_label(std::span<const int> labels);
inline ExtendedLabel extend_label(const LabelSequence& l) {
  return extend_label(l.labels());
}

// Merge adjacent repeats, then drop blanks. May return an empty vector.
std::vector<int> collapse(std::span<const int> path, int num_classes);
inline std::vector<int> collapse(std::span<const int> path,
                                 const Alphabet& alphabet) {
  return collapse(path, alphabet.size());
}

// Unordered collection of target sequences for one image. Never empty.
class TargetSet {
 public:
  explicit TargetSet(std::vector<LabelSequence> sequences);
  static TargetSet from_strings(const std::vector<std::string>& texts,
                                const Alphabet& alphabet);

  const std::vector<LabelSequence>& sequences() const { return sequences_; }
  std::size_t size() const { return sequences_.size(); }

 private:
  std::vector<LabelSequence> sequences_;
};

struct GridShape {
  int height = 0;
  int width = 0;
  int classes = 0;

  std::size_t cells() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t numel() const {
    return cells() * static_cast<std::size_t>(classes);
  }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// H x W x Q row-major array of doubles; the tag keeps probabilities, logits
// and gradients from being mixed up.
template <class Tag>
class BasicGrid {
 public:
  BasicGrid() = default;
  explicit BasicGrid(GridShape shape) : BasicGrid(shape, 0.0) {}
  BasicGrid(GridShape shape, double fill) : shape_(check(shape)) {
    data_.assign(shape_.numel(), fill);
  }
  BasicGrid(GridShape shape, std::vector<double> data)
      : shape_(check(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw InvalidInput("grid data size does not match shape");
    }
  }

  const GridShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int classes() const { return shape_.classes; }

  double& at(int i, int j, int k) { return data_[offset(i, j) + k]; }
  double at(int i, int j, int k) const { return data_[offset(i, j) + k]; }

  std::span<double> cell(int i, int j) {
    return {data_.data() + offset(i, j), static_cast<std::size_t>(classes())};
  }
  std::span<const double> cell(int i, int j) const {
    return {data_.data() + offset(i, j), static_cast<std::size_t>(classes())};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  static GridShape check(GridShape s) {
    if (s.height <= 0 || s.width <= 0 || s.classes <= 0) {
      throw InvalidInput("grid dimensions must be positive");
    }
    return s;
  }
  std::size_t offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(width()) +
            static_cast<std::size_t>(j)) *
           static_cast<std::size_t>(classes());
  }

  GridShape shape_;
  std::vector<double> data_;
};

struct ProbTag {};
struct LogitTag {};
struct GradTag {};

using ProbGrid = BasicGrid<ProbTag>;
using LogitsGrid = BasicGrid<LogitTag>;
using GridGradient = BasicGrid<GradTag>;

ProbGrid softmax_grid(const LogitsGrid& logits);

struct GridIssue {
  enum class Kind { kSumDeviation, kNegativeEntry, kNonFinite };
  Kind kind;
  int row;
  int col;
  // Signed deviation of the cell sum from 1, or the offending entry.
  double value;
};

struct GridDiagnostics {
  std::vector<GridIssue> issues;
  double max_sum_deviation = 0.0;
  double min_entry = 0.0;
  bool has_non_finite = false;

  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

inline constexpr double kCellSumTolerance = 1e-9;

GridDiagnostics validate_grid(const ProbGrid& x,
                              double tolerance = kCellSumTolerance);

// Swaps rows and columns.
template <class Tag>
BasicGrid<Tag> transpose(const BasicGrid<Tag>& g) {
  BasicGrid<Tag> out(GridShape{g.width(), g.height(), g.classes()});
  for (int i = 0; i < g.height(); ++i) {
    for (int j = 0; j < g.width(); ++j) {
      for (int k = 0; k < g.classes(); ++k) out.at(j, i, k) = g.at(i, j, k);
    }
  }
  return out;
}

}  // namespace msra

#endif  // MSRA_CORE_HPP_
