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

#ifndef BAYESPRED_SPECIAL_HPP
#define BAYESPRED_SPECIAL_HPP

namespace bayespred {

/// Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Digamma function for x > 0.
/**
 * Arguments below 10 are shifted upward with psi(x) = psi(x + 1) - 1/x, then the
 * asymptotic Bernoulli series is summed through the x^-14 term. Absolute error is
 * below 1e-13 across the positive axis.
 */
double digamma(double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// log B(a, b) for a, b > 0.
double log_beta(double a, double b);

}  // namespace bayespred

#endif
