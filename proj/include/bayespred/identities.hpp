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

#ifndef BAYESPRED_IDENTITIES_HPP
#define BAYESPRED_IDENTITIES_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace bayespred {

/// Integral over (0, 1) of x^p (1 - x)^q (1 + w x)^{-(p + q + 2)} by quadrature.
double beta_integral_quadrature(double p, double q, double w);

/// Closed form B(p + 1, q + 1) / (1 + w)^{p + 1} of the same integral.
double beta_integral_closed_form(double p, double q, double w);

struct IdentitySuiteConfig {
  std::size_t lemma_instances = 200;
  double lemma_tolerance = 1e-8;
  std::size_t quadratic_form_instances = 200;
  double quadratic_form_tolerance = 1e-8;
  std::size_t beta_instances = 50;
  double beta_tolerance = 1e-6;
  std::size_t chi_square_draws = 100000;
  double chi_square_se_multiple = 4.0;
  int chi_square_dof = 9;
  int chi_square_numerator_dof = 3;
  double chi_square_nu = 0.2;
  std::size_t log_grid_points = 10000;
  double log_tolerance = 0.0;
};

/// One identity: worst gap over its instances against its tolerance.
struct IdentityOutcome {
  std::string name;
  std::size_t instances = 0;
  double max_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityOutcome> outcomes;
  bool all_pass() const;
};

/// Runs every identity with a nonzero instance count; random instances derive from `seed`.
/**
 * For the chi-square identity max_gap is |gap| / std_error and the tolerance is the
 * allowed multiple of the standard error.
 */
IdentityReport run_identity_suite(const IdentitySuiteConfig& config, std::uint64_t seed);

}  // namespace bayespred

#endif
