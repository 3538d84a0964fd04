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

#ifndef MSRA_LAMBDA_PARAMS_HPP_
#define MSRA_LAMBDA_PARAMS_HPP_

#include <cmath>

#include "msra/core.hpp"

namespace msra {

// Linear weights on lattice transitions. `horizontal` scores a step from
// (i, j-1) into (i, j); `vertical` a step from (i-1, j).
struct LambdaParams {
  double horizontal = 0.9;
  double vertical = 0.1;

  void validate() const {
    if (!(horizontal >= 0.0) || !(vertical >= 0.0) ||
        !(horizontal + vertical > 0.0) || !std::isfinite(horizontal) ||
        !std::isfinite(vertical)) {
      throw InvalidInput("transition weights must be finite, non-negative "
                         "and not both zero");
    }
  }

  bool stochastic() const {
    return std::abs(horizontal + vertical - 1.0) <= 1e-12;
  }

  LambdaParams swapped() const { return {vertical, horizontal}; }
};

}  // namespace msra

#endif  // MSRA_LAMBDA_PARAMS_HPP_
