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

#ifndef BAYESPRED_QUADRATURE_HPP
#define BAYESPRED_QUADRATURE_HPP

#include <functional>

namespace bayespred {

/// Adaptive double-exponential quadrature on [lower, upper]; tolerates integrable endpoint singularities.
double integrate_interval(const std::function<double(double)>& f, double lower, double upper,
                          double relative_tolerance = 1e-12);

/// Adaptive quadrature on (lower, +inf).
double integrate_half_line(const std::function<double(double)>& f, double lower,
                           double relative_tolerance = 1e-12);

/// Adaptive quadrature on the whole real line.
double integrate_real_line(const std::function<double(double)>& f,
                           double relative_tolerance = 1e-12);

}  // namespace bayespred

#endif
