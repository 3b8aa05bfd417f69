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

#include "bayespred/identities.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "bayespred/canonical.hpp"
#include "bayespred/error.hpp"
#include "bayespred/predictive.hpp"
#include "bayespred/quadrature.hpp"
#include "bayespred/risk.hpp"
#include "bayespred/rng.hpp"
#include "bayespred/special.hpp"

namespace bayespred {

namespace {

// Sub-stream indices of Stream::kIdentity; the chi-square check uses index 0.
constexpr std::uint64_t kLemmaIndex = 1;
constexpr std::uint64_t kFormIndex = 2;
constexpr std::uint64_t kBetaIndex = 3;

double uniform(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Vector normal_vector(CounterRng& rng, int size, double scale) {
  Vector out(size);
  for (int i = 0; i < size; ++i) {
    out(i) = scale * rng.normal();
  }
  return out;
}

Matrix orthonormal_columns(CounterRng& rng, int rows, int cols) {
  Matrix a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    a.col(j) = normal_vector(rng, rows, 1.0);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

int uniform_int(CounterRng& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + static_cast<int>(rng.next_u32() % static_cast<std::uint32_t>(span));
}

IdentityOutcome make_outcome(std::string name, std::size_t instances, double max_gap,
                             double tolerance) {
  IdentityOutcome out;
  out.name = std::move(name);
  out.instances = instances;
  out.max_gap = max_gap;
  out.tolerance = tolerance;
  out.pass = max_gap <= tolerance;
  return out;
}

}  // namespace

double beta_integral_quadrature(double p, double q, double w) {
  if (!(p > -1.0) || !(q > -1.0) || !(w > -1.0)) {
    throw DomainError("beta_integral_quadrature: need p, q > -1 and w > -1");
  }
  const double g = p + q + 2.0;
  // Split at 1/2 and reflect the upper half so both singular endpoints sit at zero.
  auto lower = [&](double x) {
    return std::exp(p * std::log(x) + q * std::log1p(-x) - g * std::log1p(w * x));
  };
  auto upper = [&](double t) {
    return std::exp(p * std::log1p(-t) + q * std::log(t) - g * std::log1p(w * (1.0 - t)));
  };
  return integrate_interval(lower, 0.0, 0.5) + integrate_interval(upper, 0.0, 0.5);
}

double beta_integral_closed_form(double p, double q, double w) {
  return std::exp(log_beta(p + 1.0, q + 1.0) - (p + 1.0) * std::log1p(w));
}

bool IdentityReport::all_pass() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const IdentityOutcome& o) { return o.pass; });
}

IdentityReport run_identity_suite(const IdentitySuiteConfig& config, std::uint64_t seed) {
  IdentityReport report;

  if (config.lemma_instances > 0) {
    CounterRng rng(seed, kLemmaIndex, Stream::kIdentity);
    double worst = 0.0;
    for (std::size_t i = 0; i < config.lemma_instances; ++i) {
      const int l = uniform_int(rng, 1, 4);
      const int m = uniform_int(rng, l, 6);
      const Matrix Q = orthonormal_columns(rng, m, l);
      Vector f(l);
      Vector d_star(l);
      for (int j = 0; j < l; ++j) {
        f(j) = rng.uniform();
        d_star(j) = uniform(rng, 0.1, 5.0);
      }
      // Both boundary settings of F appear among the instances.
      if (i % 10 == 0) {
        f.setZero();
      } else if (i % 10 == 1) {
        f.setOnes();
      }
      const Vector y = normal_vector(rng, m, 2.0);
      const Vector v = normal_vector(rng, l, 2.0);
      worst = std::max(worst, lemma_identity_residual(f, d_star, Q, y, v).relative_gap());
    }
    report.outcomes.push_back(
        make_outcome("lemma", config.lemma_instances, worst, config.lemma_tolerance));
  }

  if (config.quadratic_form_instances > 0) {
    CounterRng rng(seed, kFormIndex, Stream::kIdentity);
    double worst = 0.0;
    for (std::size_t i = 0; i < config.quadratic_form_instances; ++i) {
      const int l = uniform_int(rng, 1, 4);
      const int m = uniform_int(rng, l, 6);
      const Matrix Q = orthonormal_columns(rng, m, l);
      Vector d(l);
      Vector c(l);
      for (int j = 0; j < l; ++j) {
        d(j) = uniform(rng, 0.05, 3.0);
        c(j) = uniform(rng, 1.0, 6.0);
      }
      const Alpha alpha(uniform(rng, -1.0, 0.95));
      const Vector y = normal_vector(rng, m, 2.0);
      const Vector v = normal_vector(rng, l, 2.0);
      const QuadraticFormConsistency forms = quadratic_form_consistency(Q, d, c, alpha, y, v);
      worst = std::max({worst, forms.a.relative_gap(), forms.b.relative_gap()});
    }
    report.outcomes.push_back(make_outcome("quadratic_forms", config.quadratic_form_instances,
                                           worst, config.quadratic_form_tolerance));
  }

  if (config.beta_instances > 0) {
    CounterRng rng(seed, kBetaIndex, Stream::kIdentity);
    double worst = 0.0;
    for (std::size_t i = 0; i < config.beta_instances; ++i) {
      const double p = uniform(rng, -0.9, 5.0);
      const double q = uniform(rng, -0.9, 5.0);
      const double w = uniform(rng, 0.01, 20.0);
      const double exact = beta_integral_closed_form(p, q, w);
      const double numeric = beta_integral_quadrature(p, q, w);
      worst = std::max(worst, std::abs(numeric - exact) / std::abs(exact));
    }
    report.outcomes.push_back(
        make_outcome("beta_integral", config.beta_instances, worst, config.beta_tolerance));
  }

  if (config.chi_square_draws > 0) {
    const double nu = config.chi_square_nu;
    const ChiSquareIdentityResult chi = chi_square_identity_check(
        [nu](double w) { return phi_nu(w, nu); },
        [nu](double w) { return phi_nu_derivative(w, nu); }, config.chi_square_dof,
        config.chi_square_numerator_dof, config.chi_square_draws, seed);
    const double ratio = chi.std_error > 0.0 ? std::abs(chi.gap) / chi.std_error
                                             : (chi.gap == 0.0 ? 0.0 : HUGE_VAL);
    report.outcomes.push_back(make_outcome("chi_square", config.chi_square_draws, ratio,
                                           config.chi_square_se_multiple));
  }

  if (config.log_grid_points > 0) {
    const double violation = log_inequality_max_violation(config.log_grid_points);
    report.outcomes.push_back(make_outcome("log_inequality", config.log_grid_points,
                                           violation, config.log_tolerance));
  }
  return report;
}

}  // namespace bayespred
