// Copyright 2026 The bayespred Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BAYESPRED_BOUNDS_HPP
#define BAYESPRED_BOUNDS_HPP

#include <string>
#include <vector>

#include "bayespred/canonical.hpp"

namespace bayespred {

/// Upper limits on nu under which the shrinkage plug-in estimators dominate UMVU.
struct NuBounds {
  double nu1 = 0.0;
  double nu2 = 0.0;
  double nu3 = 0.0;
  double nu_max = 0.0;
  bool positive = false;
  std::vector<std::string> warnings;
};

/// nu1, nu2, nu3 from the ratios d_i / c_i.
/**
 * When n - k < 2 a warning is attached; if the nu2 denominator is not positive there,
 * nu2 is reported as +infinity.
 */
NuBounds nu_limits(const Vector& d, const Vector& c, int m, int n, int k);

/// Smallest factor g >= 1 (with a 5% margin) such that C = g C0 gives a positive nu1.
double rescale_C_for_positivity(const Vector& d, const Vector& c0, int m, int n, int k);

/// nu = (k + 2a + 2) / (n - k).
double nu_of_prior(int k, double a, int n);
/// a = (nu (n - k) - k - 2) / 2; requires nu > 0.
double a_of_nu(int k, double nu, int n);

/// l - 2 <= 2 (sum(d) / d_1 - 2); d must be nonincreasing.
bool condition_d(const Vector& d, int l);

}  // namespace bayespred

#endif
