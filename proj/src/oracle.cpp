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

#include "msra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msra::oracle {

double MonotonePath::weight(const LambdaParams& lambda) const {
  return std::pow(lambda.horizontal, right_steps) *
         std::pow(lambda.vertical, down_steps);
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int m = 1; m <= k; ++m) {
    r = r * static_cast<std::uint64_t>(n - k + m) / static_cast<std::uint64_t>(m);
  }
  return r;
}

namespace {

void extend_paths(int height, int width, MonotonePath& cur,
                  std::vector<MonotonePath>& out) {
  const Cell last = cur.cells.back();
  if (last.row == height - 1 && last.col == width - 1) {
    out.push_back(cur);
    return;
  }
  if (last.col + 1 < width) {
    cur.cells.push_back({last.row, last.col + 1});
    ++cur.right_steps;
    extend_paths(height, width, cur, out);
    --cur.right_steps;
    cur.cells.pop_back();
  }
  if (last.row + 1 < height) {
    cur.cells.push_back({last.row + 1, last.col});
    ++cur.down_steps;
    extend_paths(height, width, cur, out);
    --cur.down_steps;
    cur.cells.pop_back();
  }
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int e = 0; e < exp; ++e) {
    if (r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

void check_sequence(const Sequence1D& probs, std::span<const int> labels) {
  if (probs.empty()) throw InvalidInput("1D CTC needs at least one step");
  const std::size_t q = probs.front().size();
  for (const auto& p : probs) {
    if (p.size() != q) throw InvalidInput("ragged 1D probability sequence");
  }
  for (int k : labels) {
    if (k <= 0 || static_cast<std::size_t>(k) >= q) {
      throw InvalidInput("1D CTC label out of range");
    }
  }
}

Sequence1D cells_along(const ProbGrid& x, const MonotonePath& path) {
  Sequence1D seq;
  seq.reserve(path.cells.size());
  for (const Cell& c : path.cells) {
    auto cell = x.cell(c.row, c.col);
    seq.emplace_back(cell.begin(), cell.end());
  }
  return seq;
}

}  // namespace

std::vector<MonotonePath> enumerate_paths(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw InvalidInput("path enumeration needs a non-empty grid");
  }
  if (binomial(height + width - 2, height - 1) > kMaxPaths) {
    throw GuardExceeded("too many monotone paths for a " +
                        std::to_string(height) + "x" + std::to_string(width) +
                        " grid");
  }
  std::vector<MonotonePath> out;
  MonotonePath cur;
  cur.cells.push_back({0, 0});
  extend_paths(height, width, cur, out);
  return out;
}

double ctc1d_forward(const Sequence1D& probs, std::span<const int> labels) {
  check_sequence(probs, labels);
  if (labels.empty()) {
    double p = 1.0;
    for (const auto& step : probs) p *= step[0];
    return p;
  }
  std::vector<int> ext{0};
  for (int k : labels) {
    ext.push_back(k);
    ext.push_back(0);
  }
  const std::size_t S = ext.size();
  std::vector<double> a(S, 0.0), next(S, 0.0);
  a[0] = probs[0][0];
  a[1] = probs[0][static_cast<std::size_t>(ext[1])];
  for (std::size_t t = 1; t < probs.size(); ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double sum = a[s];
      if (s >= 1) sum += a[s - 1];
      if (s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2]) sum += a[s - 2];
      next[s] = sum * probs[t][static_cast<std::size_t>(ext[s])];
    }
    std::swap(a, next);
  }
  return a[S - 1] + a[S - 2];
}

double ctc1d_enumerate(const Sequence1D& probs, std::span<const int> labels) {
  check_sequence(probs, labels);
  const int T = static_cast<int>(probs.size());
  const int Q = static_cast<int>(probs.front().size());
  if (checked_pow(static_cast<std::uint64_t>(Q), T, kMaxLabelings) >
      kMaxLabelings) {
    throw GuardExceeded("too many 1D labelings to enumerate");
  }
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  const std::vector<int> target(labels.begin(), labels.end());
  double total = 0.0;
  while (true) {
    if (collapse(path, Q) == target) {
      double p = 1.0;
      for (int t = 0; t < T; ++t) {
        p *= probs[static_cast<std::size_t>(t)][static_cast<std::size_t>(
            path[static_cast<std::size_t>(t)])];
      }
      total += p;
    }
    int t = T - 1;
    while (t >= 0 && ++path[static_cast<std::size_t>(t)] == Q) {
      path[static_cast<std::size_t>(t)] = 0;
      --t;
    }
    if (t < 0) break;
  }
  return total;
}

double brute_force_sequence_prob(const ProbGrid& x,
                                 std::span<const int> labels,
                                 const LambdaParams& lambda) {
  double total = 0.0;
  for (const auto& path : enumerate_paths(x.height(), x.width())) {
    total += path.weight(lambda) * ctc1d_forward(cells_along(x, path), labels);
  }
  return total;
}

TotalMass brute_force_total_prob(const ProbGrid& x, const LambdaParams& lambda,
                                 bool group_by_sequence) {
  const int T = x.height() + x.width() - 1;
  const int Q = x.classes();
  const std::uint64_t paths = binomial(x.height() + x.width() - 2,
                                       x.height() - 1);
  const std::uint64_t per_path =
      checked_pow(static_cast<std::uint64_t>(Q), T, kMaxLabelings);
  if (per_path > kMaxLabelings || per_path * paths > kMaxLabelings) {
    throw GuardExceeded("too many grid labelings to enumerate");
  }
  TotalMass mass;
  std::vector<int> labeling(static_cast<std::size_t>(T), 0);
  for (const auto& path : enumerate_paths(x.height(), x.width())) {
    const double w = path.weight(lambda);
    std::fill(labeling.begin(), labeling.end(), 0);
    while (true) {
      double p = w;
      for (int t = 0; t < T; ++t) {
        const Cell c = path.cells[static_cast<std::size_t>(t)];
        p *= x.at(c.row, c.col, labeling[static_cast<std::size_t>(t)]);
      }
      mass.total += p;
      if (group_by_sequence) mass.by_sequence[collapse(labeling, Q)] += p;
      int t = T - 1;
      while (t >= 0 && ++labeling[static_cast<std::size_t>(t)] == Q) {
        labeling[static_cast<std::size_t>(t)] = 0;
        --t;
      }
      if (t < 0) break;
    }
  }
  return mass;
}

NumericGradient finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> point, double eps) {
  NumericGradient g;
  g.values.resize(point.size(), 0.0);
  std::vector<double> probe(point.begin(), point.end());
  for (std::size_t n = 0; n < probe.size(); ++n) {
    const double orig = probe[n];
    probe[n] = orig + eps;
    const double up = f(probe);
    probe[n] = orig - eps;
    const double down = f(probe);
    probe[n] = orig;
    const double d = (up - down) / (2.0 * eps);
    if (!std::isfinite(d)) {
      g.non_finite.push_back(n);
      g.values[n] = std::numeric_limits<double>::quiet_NaN();
    } else {
      g.values[n] = d;
    }
  }
  return g;
}

double relative_error(double a, double b, double floor) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

int InstanceGenerator::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng_() % span);
}

ProbGrid InstanceGenerator::random_grid(int height, int width, int classes) {
  ProbGrid g(GridShape{height, width, classes});
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      auto cell = g.cell(i, j);
      double sum = 0.0;
      for (double& v : cell) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        v = limits_.min_entry + (1.0 - limits_.min_entry) * u;
        sum += v;
      }
      for (double& v : cell) v /= sum;
    }
  }
  return g;
}

std::vector<int> InstanceGenerator::random_label(int height, int width,
                                                 int classes) {
  const int cells = height + width - 1;
  for (;;) {
    const int len = uniform_int(1, std::min(limits_.max_label, cells));
    std::vector<int> l(static_cast<std::size_t>(len));
    for (int& k : l) k = uniform_int(1, classes - 1);
    int need = len;
    for (std::size_t m = 1; m < l.size(); ++m) need += l[m] == l[m - 1];
    if (need <= cells) return l;
  }
}

Instance InstanceGenerator::next() {
  const int h = uniform_int(1, limits_.max_height);
  const int w = uniform_int(1, limits_.max_width);
  const int q = uniform_int(limits_.min_classes, limits_.max_classes);
  ProbGrid grid = random_grid(h, w, q);
  std::vector<int> labels = random_label(h, w, q);
  return Instance{std::move(grid), std::move(labels)};
}

}  // namespace msra::oracle
