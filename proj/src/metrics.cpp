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

#include "msra/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "msra/core.hpp"

namespace msra {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_distance(std::string_view truth, std::string_view pred) {
  if (truth.empty()) {
    throw InvalidInput("normalized edit distance needs a non-empty truth");
  }
  return static_cast<double>(edit_distance(truth, pred)) /
         static_cast<double>(truth.size());
}

double MatchReport::ned_sum() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.ned;
  return s;
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost,
                                          std::size_t n) {
  if (cost.size() != n * n) {
    throw InvalidInput("assignment cost matrix is not n x n");
  }
  if (n == 0) return {};
  // Shortest augmenting path with row/column potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double c = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (c < minv[j]) {
          minv[j] = c;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

MatchReport match_sets(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& truths) {
  MatchReport r;
  r.truth_count = truths.size();
  r.prediction_count = predictions.size();
  r.pairs.resize(truths.size());

  std::vector<char> pred_used(predictions.size(), 0);
  std::vector<std::size_t> open_truths;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    r.pairs[t].truth = t;
    bool matched = false;
    for (std::size_t q = 0; q < predictions.size(); ++q) {
      if (!pred_used[q] && predictions[q] == truths[t]) {
        pred_used[q] = 1;
        r.pairs[t].prediction = q;
        r.pairs[t].ned = 0.0;
        ++r.exact_matches;
        matched = true;
        break;
      }
    }
    if (!matched) open_truths.push_back(t);
  }
  std::vector<std::size_t> open_preds;
  for (std::size_t q = 0; q < predictions.size(); ++q) {
    if (!pred_used[q]) open_preds.push_back(q);
  }

  // Rows: open truths then one dummy per open prediction. Columns: open
  // predictions then one dummy per open truth. truth x dummy = unmatched.
  const std::size_t nt = open_truths.size();
  const std::size_t np = open_preds.size();
  const std::size_t n = nt + np;
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      cost[a * n + b] =
          b < np ? normalized_edit_distance(truths[open_truths[a]],
                                            predictions[open_preds[b]])
                 : 1.0;
    }
  }
  const auto assignment = solve_assignment(cost, n);
  for (std::size_t a = 0; a < nt; ++a) {
    auto& pair = r.pairs[open_truths[a]];
    const std::size_t b = assignment[a];
    if (b < np) {
      pair.prediction = open_preds[b];
      pair.ned = cost[a * n + b];
    } else {
      pair.prediction.reset();
      pair.ned = 1.0;
    }
  }
  r.image_exact = r.exact_matches == r.truth_count &&
                  r.truth_count == r.prediction_count;
  return r;
}

DatasetMetrics aggregate(const std::vector<MatchReport>& reports) {
  if (reports.empty()) throw InvalidInput("cannot aggregate zero reports");
  DatasetMetrics m;
  double ned = 0.0;
  std::size_t exact = 0;
  std::size_t exact_images = 0;
  for (const auto& r : reports) {
    ned += r.ned_sum();
    exact += r.exact_matches;
    m.sequences += r.truth_count;
    exact_images += r.image_exact ? 1 : 0;
  }
  m.images = reports.size();
  if (m.sequences > 0) {
    m.ned_percent = 100.0 * ned / static_cast<double>(m.sequences);
    m.sa_percent = 100.0 * static_cast<double>(exact) /
                   static_cast<double>(m.sequences);
  }
  m.ia_percent = 100.0 * static_cast<double>(exact_images) /
                 static_cast<double>(m.images);
  return m;
}

std::string metrics_json(const DatasetMetrics& m) {
  nlohmann::json j = {{"ned_percent", m.ned_percent},
                      {"sa_percent", m.sa_percent},
                      {"ia_percent", m.ia_percent},
                      {"images", m.images},
                      {"sequences", m.sequences}};
  return j.dump();
}

void print_metrics_table(std::ostream& os, const DatasetMetrics& m) {
  os << std::fixed << std::setprecision(2);
  os << "images     " << m.images << '\n'
     << "sequences  " << m.sequences << '\n'
     << "NED(%)     " << m.ned_percent << '\n'
     << "SA(%)      " << m.sa_percent << '\n'
     << "IA(%)      " << m.ia_percent << '\n';
  os.unsetf(std::ios::floatfield);
}

}  // namespace msra
