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

#ifndef BAYESPRED_CANONICAL_HPP
#define BAYESPRED_CANONICAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

/**
 * \file
 * \brief Reduction of the regression prediction problem to independent canonical statistics.
 *
 * Observation y ~ N_n(X beta, sigma^2 I) and future ytilde ~ N_m(Xtilde beta, sigma^2 I)
 * are mapped to
 *
 *   V ~ N_l(theta, D / eta),  V* ~ N_{k-l}(mu, I / eta),  eta S ~ chi^2_{n-k},
 *   ytilde ~ N_m(Q theta, I / eta),
 *
 * with l = min(k, m), D diagonal and nonincreasing, and Q'Q = I_l.
 */

namespace bayespred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Condition number of X'X above which a warning is attached.
inline constexpr double kConditioningWarning = 1e12;
/// Condition number of X'X treated as numerical rank deficiency.
inline constexpr double kRankDeficiencyLimit = 1e15;

struct RegressionData {
  Matrix X;       ///< n x k design
  Vector y;       ///< n responses
  Matrix Xtilde;  ///< m x k future design

  void validate() const;
};

struct SufficientStats {
  Vector beta_hat;  ///< least squares estimate
  double S = 0.0;   ///< residual sum of squares
};

enum class CanonicalCase { I, II };

struct CanonicalProblem {
  int n = 0;
  int k = 0;
  int m = 0;
  int l = 0;
  Vector d;  ///< diagonal of D, nonincreasing
  Matrix Q;  ///< m x l, column orthonormal
  CanonicalCase canonical_case = CanonicalCase::I;

  Matrix M;            ///< Case I: k x k with M'(X'X)^{-1}M = D and MM' = Xtilde'Xtilde
  Matrix P;            ///< Case II: m x m orthogonal
  Matrix P_star;       ///< Case II: (k-m) x (k-m) whitening factor
  Matrix Xtilde_star;  ///< Case II: (k-m) x k complement of Xtilde

  Matrix X;
  Matrix Xtilde;
  Matrix xtx_inverse;
  double xtx_condition = 1.0;
  std::vector<std::string> warnings;

  int residual_dof() const { return n - k; }
  int complement_dim() const { return k - l; }
};

struct CanonicalObservation {
  Vector V;
  Vector V_star;  ///< empty when m >= k
  double S = 0.0;
};

struct CanonicalParams {
  Vector theta;
  Vector mu;
  double eta = 1.0;  ///< precision 1 / sigma^2

  double sigma2() const { return 1.0 / eta; }
};

/// Least squares coefficients and residual sum of squares via the normal equations.
SufficientStats sufficient_statistics(const RegressionData& data);

/// Builds the canonical geometry; Case I iff m >= k.
CanonicalProblem canonicalize(const Matrix& X, const Matrix& Xtilde);

CanonicalObservation to_canonical(const CanonicalProblem& problem, const SufficientStats& stats);

CanonicalParams params_to_canonical(const CanonicalProblem& problem, const Vector& beta,
                                    double sigma2);

/// Draws (V, V*, S) for replication `replication` of the experiment keyed by `seed`.
CanonicalObservation simulate_observation(const CanonicalProblem& problem,
                                          const CanonicalParams& params, std::uint64_t seed,
                                          std::uint64_t replication = 0);

/// One named invariant with its measured residual.
struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool all_pass() const;
};

/// Measures every structural invariant of a canonical problem.
InvariantReport check_invariants(const CanonicalProblem& problem);

/// The replicated design X = 1_N (x) Xtilde.
Matrix replicated_design(const Matrix& Xtilde, int replicates);

}  // namespace bayespred

#endif
