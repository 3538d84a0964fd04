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

#include "msra/decode.hpp"

#include <algorithm>
#include <limits>

#include "msra/metrics.hpp"

namespace msra {

ArgmaxGrid::ArgmaxGrid(int height, int width, std::vector<int> classes)
    : height_(height), width_(width), m_(std::move(classes)) {
  if (height <= 0 || width <= 0) {
    throw InvalidInput("argmax grid dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (m_.empty()) m_.assign(n, kBlank);
  if (m_.size() != n) {
    throw InvalidInput("argmax grid data size does not match shape");
  }
}

ArgmaxGrid ArgmaxGrid::transposed() const {
  ArgmaxGrid t(width_, height_);
  for (int i = 0; i < height_; ++i) {
    for (int j = 0; j < width_; ++j) t.at(j, i) = at(i, j);
  }
  return t;
}

ArgmaxGrid argmax_grid(const ProbGrid& x) {
  ArgmaxGrid m(x.height(), x.width());
  for (int i = 0; i < x.height(); ++i) {
    for (int j = 0; j < x.width(); ++j) {
      auto cell = x.cell(i, j);
      // max_element returns the first maximum.
      m.at(i, j) = static_cast<int>(
          std::max_element(cell.begin(), cell.end()) - cell.begin());
    }
  }
  return m;
}

std::string GroupingStrategy::name() const {
  switch (kind) {
    case Kind::kRows:
      return "rows";
    case Kind::kColumns:
      return "columns";
    case Kind::kRowsAndColumns:
      return "rows-and-columns";
    case Kind::kMergedRows:
      return merge_gap == 0 ? "merged-rows"
                            : "merged-rows:" + std::to_string(merge_gap);
  }
  return "unknown";
}

GroupingStrategy GroupingStrategy::parse(std::string_view name) {
  if (name == "rows") return rows();
  if (name == "columns") return columns();
  if (name == "rows-and-columns") return rows_and_columns();
  if (name == "merged-rows") return merged_rows();
  constexpr std::string_view kMerged = "merged-rows:";
  if (name.substr(0, kMerged.size()) == kMerged) {
    const std::string gap(name.substr(kMerged.size()));
    try {
      std::size_t used = 0;
      const int g = std::stoi(gap, &used);
      if (used == gap.size() && g >= 0) return merged_rows(g);
    } catch (const std::exception&) {
    }
  }
  throw InvalidInput("unknown grouping strategy '" + std::string(name) + "'");
}

std::vector<std::string> DecodeResult::strings(const Alphabet& alphabet) const {
  std::vector<std::string> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(alphabet.render(s.labels.labels()));
  return out;
}

namespace {

std::vector<int> segment_classes(const ArgmaxGrid& m, const Segment& seg) {
  std::vector<int> out;
  for (int k = seg.start; k <= seg.end; ++k) {
    out.push_back(seg.axis == Axis::kRow ? m.at(seg.line, k)
                                         : m.at(k, seg.line));
  }
  return out;
}

void emit_group(const ArgmaxGrid& m, std::vector<Segment> group,
                const Alphabet& alphabet, DecodeResult& out) {
  std::vector<int> concat;
  for (const auto& seg : group) {
    auto part = segment_classes(m, seg);
    concat.insert(concat.end(), part.begin(), part.end());
  }
  auto labels = collapse(concat, alphabet);
  if (labels.empty()) return;
  out.sequences.push_back({LabelSequence(std::move(labels)), std::move(group)});
}

Segment full_row(const ArgmaxGrid& m, int i) {
  return {Axis::kRow, i, 0, m.width() - 1};
}
Segment full_col(const ArgmaxGrid& m, int j) {
  return {Axis::kColumn, j, 0, m.height() - 1};
}

}  // namespace

DecodeResult decode_with_strategy(const ArgmaxGrid& m,
                                  const GroupingStrategy& strategy,
                                  const Alphabet& alphabet) {
  DecodeResult out;
  using Kind = GroupingStrategy::Kind;
  switch (strategy.kind) {
    case Kind::kRows:
      for (int i = 0; i < m.height(); ++i) {
        emit_group(m, {full_row(m, i)}, alphabet, out);
      }
      break;
    case Kind::kColumns:
      for (int j = 0; j < m.width(); ++j) {
        emit_group(m, {full_col(m, j)}, alphabet, out);
      }
      break;
    case Kind::kRowsAndColumns: {
      DecodeResult all;
      for (int i = 0; i < m.height(); ++i) {
        emit_group(m, {full_row(m, i)}, alphabet, all);
      }
      for (int j = 0; j < m.width(); ++j) {
        emit_group(m, {full_col(m, j)}, alphabet, all);
      }
      for (auto& seq : all.sequences) {
        const bool seen = std::any_of(
            out.sequences.begin(), out.sequences.end(),
            [&](const DecodedSequence& d) { return d.labels == seq.labels; });
        if (!seen) out.sequences.push_back(std::move(seq));
      }
      break;
    }
    case Kind::kMergedRows: {
      std::vector<Segment> group;
      int empty_run = 0;
      for (int i = 0; i < m.height(); ++i) {
        const Segment seg = full_row(m, i);
        if (collapse(segment_classes(m, seg), alphabet).empty()) {
          ++empty_run;
          if (!group.empty() && empty_run > strategy.merge_gap) {
            emit_group(m, std::move(group), alphabet, out);
            group.clear();
          }
          continue;
        }
        empty_run = 0;
        group.push_back(seg);
      }
      if (!group.empty()) emit_group(m, std::move(group), alphabet, out);
      break;
    }
  }
  return out;
}

double strategy_score(const GroupingStrategy& strategy,
                      std::span<const StrategySample> samples,
                      const Alphabet& alphabet) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& sample : samples) {
    const auto decoded =
        decode_with_strategy(sample.matrix, strategy, alphabet).strings(alphabet);
    for (const auto& truth_seq : sample.targets.sequences()) {
      const std::string truth = alphabet.render(truth_seq.labels());
      double best = 1.0;
      if (!decoded.empty()) {
        best = std::numeric_limits<double>::infinity();
        for (const auto& d : decoded) {
          best = std::min(best, normalized_edit_distance(truth, d));
        }
      }
      total += best;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

StrategySelection select_strategy(std::span<const GroupingStrategy> candidates,
                                  std::span<const StrategySample> samples,
                                  const Alphabet& alphabet) {
  if (candidates.empty()) throw InvalidInput("no candidate strategies");
  if (samples.empty()) throw InvalidInput("no samples to score strategies on");
  StrategySelection sel{candidates.front(),
                        std::numeric_limits<double>::infinity(),
                        {}};
  for (const auto& c : candidates) {
    const double s = strategy_score(c, samples, alphabet);
    sel.all.push_back({c, s});
    if (s < sel.score) {
      sel.score = s;
      sel.best = c;
    }
  }
  return sel;
}

}  // namespace msra
