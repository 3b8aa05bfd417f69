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

#ifndef BAYESPRED_RISK_HPP
#define BAYESPRED_RISK_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bayespred/canonical.hpp"
#include "bayespred/predictive.hpp"

namespace bayespred {

/// Generator of the alpha-divergence: 4(1 - z^{(1+alpha)/2})/(1 - alpha^2), z log z at 1, -log z at -1.
double f_alpha(double z, Alpha alpha);

/// f_alpha(z) + 2(z - 1)/(1 - alpha): same divergence for normalized densities, continuous in alpha.
/**
 * The limits are z log z - z + 1 at alpha = 1 and -log z + z - 1 at alpha = -1.
 */
double f_alpha_centered(double z, Alpha alpha);

/// Stein's (entropy) loss sigma2_hat/sigma2 - log(sigma2_hat/sigma2) - 1.
double stein_loss(double sigma2_hat, double sigma2);

/// alpha = 1 divergence of N_m(Q theta_hat, sigma2_hat I) from N_m(Q theta, sigma2 I).
double d1_loss_plugin(const Vector& theta_hat, double sigma2_hat, const Vector& theta, double sigma2,
                      int m);

/// Constant risk of the UMVU plug-in: (tr D + m(log g - psi(g))) / 2 with g = (n - k)/2.
double minimax_risk(const Vector& d, int m, int n, int k);

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t excluded = 0;
};

/// Mean and standard error with pairwise summation in index order.
RiskEstimate summarize(std::span<const double> values, std::uint64_t seed);

/// Monte Carlo estimate of D_alpha(phat, N_m(Q theta, I/eta)).
/**
 * For alpha <= 0 the draws come from the true density and the integrand is
 * (1 - z^delta)/(delta(1 - delta)) with delta = (1 + alpha)/2. For alpha > 0 the draws come
 * from phat (or its importance proposal) and the integrand is (1 - z^-eps)/(eps(1 - eps))
 * with eps = (1 - alpha)/2, which becomes log z at alpha = 1. Both are unbiased for the
 * same divergence and have finite variance on their side of alpha = 0.
 */
RiskEstimate alpha_divergence_mc(const PredictiveDensity& phat, const Vector& theta, double eta,
                                 const CanonicalProblem& problem, Alpha alpha, std::size_t n_mc,
                                 std::uint64_t seed, std::uint64_t index = 0);

inline constexpr std::size_t kMinInnerDraws = 100;
inline constexpr std::size_t kMinReplications = 100;
inline constexpr std::size_t kMinOuterReplications = 50;

using PluginProcedure = std::function<PluginEstimate(const CanonicalObservation&)>;
using DensityBuilder =
    std::function<PredictiveDensity(const CanonicalObservation&, std::uint64_t replication)>;

/// Per-replication alpha = 1 losses of a plug-in procedure, in replication order.
std::vector<double> d1_losses(const PluginProcedure& procedure, const CanonicalProblem& problem,
                              const CanonicalParams& params, std::size_t reps, std::uint64_t seed,
                              unsigned threads = 1);

RiskEstimate risk_d1_mc(const PluginProcedure& procedure, const CanonicalProblem& problem,
                        const CanonicalParams& params, std::size_t reps, std::uint64_t seed,
                        unsigned threads = 1);

/// Maximum share of outer replications that may be dropped for failed normalization.
inline constexpr double kMaxExclusionFraction = 0.01;

/// Per-replication D_alpha losses; NaN marks an excluded replication.
std::vector<double> alpha_losses(const DensityBuilder& builder, const CanonicalProblem& problem,
                                 const CanonicalParams& params, Alpha alpha, std::size_t reps_outer,
                                 std::size_t n_mc_inner, std::uint64_t seed, unsigned threads = 1);

/// Nested Monte Carlo risk; the reported error reflects outer variation only.
RiskEstimate risk_alpha_mc(const DensityBuilder& builder, const CanonicalProblem& problem,
                           const CanonicalParams& params, Alpha alpha, std::size_t reps_outer,
                           std::size_t n_mc_inner, std::uint64_t seed, unsigned threads = 1);

/// Summary of losses with NaN exclusions; throws MonteCarloGuardError past the 1% ceiling.
RiskEstimate summarize_with_exclusions(std::span<const double> losses, std::uint64_t seed);

struct ChiSquareIdentityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double std_error = 0.0;  ///< of the paired difference
  bool within(double multiple) const { return std::abs(gap) <= multiple * std_error; }
};

/// The shrinkage function phi_nu(w) = nu w / (nu + 1 + w).
double phi_nu(double w, double nu);
double phi_nu_derivative(double w, double nu);

/// Monte Carlo check of E[phi(W) S / (W sigma^2)] = E[(p + 2) phi(W)/W - 2 phi'(W)].
/**
 * S ~ sigma^2 chi^2_dof and W = U / S with U ~ sigma^2 chi^2_numerator_dof independent
 * of S. Draws are paired, so std_error is that of the per-draw difference.
 */
ChiSquareIdentityResult chi_square_identity_check(const std::function<double(double)>& phi,
                                                  const std::function<double(double)>& phi_prime,
                                                  int dof, int numerator_dof, std::size_t n_mc,
                                                  std::uint64_t seed, double sigma2 = 1.0);

/// max over the grid of -log(1 - x) - x - x^2 / (2(1 - x)), x evenly spaced in (0, 0.99).
double log_inequality_max_violation(std::size_t grid_points);

}  // namespace bayespred

#endif
