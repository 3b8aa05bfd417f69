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

#include "bayespred/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bayespred/error.hpp"

namespace bayespred {

namespace {

Eigen::ArrayXd ratios(const Vector& d, const Vector& c) {
  if (d.size() == 0 || d.size() != c.size()) {
    throw DimensionError("bounds: D and C must be nonempty and of equal length");
  }
  if (!(d.minCoeff() > 0.0)) {
    throw DomainError("bounds: every d_i must be positive");
  }
  if (!(c.minCoeff() >= 1.0)) {
    throw DomainError("bounds: every c_i must be at least 1");
  }
  return d.array() / c.array();
}

void require_dims(int m, int n, int k) {
  if (n <= k) {
    throw DomainError("bounds: need n > k");
  }
  if (m < 1 || k < 1) {
    throw DomainError("bounds: m and k must be positive");
  }
}

}  // namespace

NuBounds nu_limits(const Vector& d, const Vector& c, int m, int n, int k) {
  require_dims(m, n, k);
  const Eigen::ArrayXd r = ratios(d, c);
  const double sum = r.sum();
  const double top = r.maxCoeff();
  const double dof = n - k;

  NuBounds out;
  out.nu1 = 4.0 * (sum - 2.0 * top + m / dof) / (2.0 * top * (dof + 2.0) + m);
  const double nu2_den = (dof - 2.0) * top + m;
  out.nu2 = nu2_den > 0.0 ? (4.0 * (sum - top) + 2.0 * m / dof) / nu2_den
                          : std::numeric_limits<double>::infinity();
  out.nu3 = 4.0 / m * sum;
  out.nu_max = std::min({out.nu1, out.nu2, out.nu3});
  out.positive = out.nu_max > 0.0;
  if (n - k < 2) {
    out.warnings.push_back("n - k < 2: the domination argument does not cover this design");
  }
  if (!out.positive) {
    out.warnings.push_back("nu1 is not positive; rescale C");
  }
  return out;
}

double rescale_C_for_positivity(const Vector& d, const Vector& c0, int m, int n, int k) {
  require_dims(m, n, k);
  const Eigen::ArrayXd r = ratios(d, c0);
  const double t = r.sum() - 2.0 * r.maxCoeff();
  const double dof = n - k;
  if (t + m / dof > 0.0) {
    return 1.0;
  }
  return std::max(1.0, 1.05 * (-t) * dof / m);
}

double nu_of_prior(int k, double a, int n) {
  if (n <= k) {
    throw DomainError("nu_of_prior: need n > k");
  }
  if (!(a > -0.5 * k - 1.0)) {
    throw DomainError("nu_of_prior: need a > -k/2 - 1");
  }
  return (k + 2.0 * a + 2.0) / (n - k);
}

double a_of_nu(int k, double nu, int n) {
  if (n <= k) {
    throw DomainError("a_of_nu: need n > k");
  }
  if (!(nu > 0.0)) {
    throw DomainError("a_of_nu: nu must be positive");
  }
  return 0.5 * (nu * (n - k) - k - 2.0);
}

bool condition_d(const Vector& d, int l) {
  if (d.size() != l || l < 1) {
    throw DimensionError("condition_d: D must have l entries");
  }
  for (int i = 1; i < l; ++i) {
    if (d(i) > d(i - 1)) {
      throw DomainError("condition_d: D must be sorted nonincreasing");
    }
  }
  if (!(d(l - 1) > 0.0)) {
    throw DomainError("condition_d: D must be positive");
  }
  return l - 2.0 <= 2.0 * (d.sum() / d(0) - 2.0);
}

}  // namespace bayespred
