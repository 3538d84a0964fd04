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

#include "msra/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace msra {

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2) {
    throw InvalidInput("alphabet needs blank plus at least one symbol");
  }
  for (std::size_t a = 0; a < symbols_.size(); ++a) {
    for (std::size_t b = a + 1; b < symbols_.size(); ++b) {
      if (symbols_[a] == symbols_[b]) {
        throw InvalidInput(std::string("duplicate alphabet symbol '") +
                           symbols_[a] + "'");
      }
    }
  }
}

Alphabet Alphabet::digits() { return Alphabet("-0123456789"); }

char Alphabet::symbol(int cls) const {
  if (cls < 0 || cls >= size()) {
    throw InvalidInput("class index " + std::to_string(cls) +
                       " outside alphabet of size " + std::to_string(size()));
  }
  return symbols_[static_cast<std::size_t>(cls)];
}

int Alphabet::index(char c) const {
  auto pos = symbols_.find(c);
  if (pos == std::string::npos) {
    throw InvalidInput(std::string("symbol '") + c + "' not in alphabet");
  }
  return static_cast<int>(pos);
}

std::vector<int> Alphabet::encode(std::string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    int k = index(c);
    if (k == kBlank) {
      throw InvalidInput("blank symbol inside label text");
    }
    out.push_back(k);
  }
  return out;
}

std::string Alphabet::render(std::span<const int> classes) const {
  std::string out;
  out.reserve(classes.size());
  for (int k : classes) out.push_back(symbol(k));
  return out;
}

LabelSequence::LabelSequence(std::vector<int> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw InvalidInput("label sequence must be non-empty");
  }
  for (int k : labels_) {
    if (k <= kBlank) {
      throw InvalidInput("label sequence may only hold non-blank classes");
    }
  }
}

int LabelSequence::max_class() const {
  return *std::max_element(labels_.begin(), labels_.end());
}

ExtendedLabel extend_label(std::span<const int> labels) {
  if (labels.empty()) {
    throw InvalidInput("cannot extend an empty label");
  }
  ExtendedLabel out;
  out.symbols.reserve(2 * labels.size() + 1);
  out.symbols.push_back(kBlank);
  for (int k : labels) {
    if (k <= kBlank) throw InvalidInput("label contains blank or negative");
    out.symbols.push_back(k);
    out.symbols.push_back(kBlank);
  }
  return out;
}

std::vector<int> collapse(std::span<const int> path, int num_classes) {
  std::vector<int> out;
  int prev = -1;
  for (int k : path) {
    if (k < 0 || k >= num_classes) {
      throw InvalidInput("path class " + std::to_string(k) +
                         " out of range [0, " + std::to_string(num_classes) +
                         ")");
    }
    if (k != prev && k != kBlank) out.push_back(k);
    prev = k;
  }
  return out;
}

TargetSet::TargetSet(std::vector<LabelSequence> sequences)
    : sequences_(std::move(sequences)) {
  if (sequences_.empty()) {
    throw InvalidInput("target set must hold at least one sequence");
  }
}

TargetSet TargetSet::from_strings(const std::vector<std::string>& texts,
                                  const Alphabet& alphabet) {
  std::vector<LabelSequence> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) seqs.emplace_back(alphabet.encode(t));
  return TargetSet(std::move(seqs));
}

ProbGrid softmax_grid(const LogitsGrid& logits) {
  ProbGrid out(logits.shape());
  for (int i = 0; i < logits.height(); ++i) {
    for (int j = 0; j < logits.width(); ++j) {
      auto z = logits.cell(i, j);
      auto p = out.cell(i, j);
      double mx = -std::numeric_limits<double>::infinity();
      for (double v : z) {
        if (!std::isfinite(v)) {
          throw InvalidInput("non-finite logit at (" + std::to_string(i) +
                             ", " + std::to_string(j) + ")");
        }
        mx = std::max(mx, v);
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - mx);
        sum += p[k];
      }
      for (double& v : p) v /= sum;
    }
  }
  return out;
}

GridDiagnostics validate_grid(const ProbGrid& x, double tolerance) {
  GridDiagnostics d;
  d.min_entry = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.height(); ++i) {
    for (int j = 0; j < x.width(); ++j) {
      double sum = 0.0;
      bool finite = true;
      for (double v : x.cell(i, j)) {
        if (!std::isfinite(v)) {
          finite = false;
          d.has_non_finite = true;
          d.issues.push_back({GridIssue::Kind::kNonFinite, i, j, v});
          continue;
        }
        if (v < 0.0) {
          d.issues.push_back({GridIssue::Kind::kNegativeEntry, i, j, v});
        }
        d.min_entry = std::min(d.min_entry, v);
        sum += v;
      }
      if (!finite) continue;
      double dev = sum - 1.0;
      d.max_sum_deviation = std::max(d.max_sum_deviation, std::abs(dev));
      if (std::abs(dev) > tolerance) {
        d.issues.push_back({GridIssue::Kind::kSumDeviation, i, j, dev});
      }
    }
  }
  return d;
}

std::string GridDiagnostics::summary() const {
  if (ok()) return "grid ok";
  std::ostringstream os;
  os << issues.size() << " issue(s)";
  const auto& first = issues.front();
  os << "; first at (" << first.row << ", " << first.col << "): ";
  switch (first.kind) {
    case GridIssue::Kind::kSumDeviation:
      os << "cell sum deviates by " << first.value;
      break;
    case GridIssue::Kind::kNegativeEntry:
      os << "negative entry " << first.value;
      break;
    case GridIssue::Kind::kNonFinite:
      os << "non-finite entry";
      break;
  }
  return os.str();
}

}  // namespace msra
