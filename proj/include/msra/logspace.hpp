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

#ifndef MSRA_LOGSPACE_HPP_
#define MSRA_LOGSPACE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace msra {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)), exact when either side is log 0.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> v) {
  double mx = kLogZero;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

inline double safe_log(double p) {
  return p <= 0.0 ? kLogZero : std::log(p);
}

}  // namespace msra

#endif  // MSRA_LOGSPACE_HPP_
