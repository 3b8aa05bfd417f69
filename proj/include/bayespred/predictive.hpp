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

#ifndef BAYESPRED_PREDICTIVE_HPP
#define BAYESPRED_PREDICTIVE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bayespred/canonical.hpp"
#include "bayespred/rng.hpp"

namespace bayespred {

/// Index of the alpha-divergence family, restricted to [-1, 1].
class Alpha {
 public:
  explicit Alpha(double value);

  double value() const { return value_; }
  /// (1 - alpha) / 2, the power applied to the sampling density inside the predictive integral.
  double half_complement() const { return 0.5 * (1.0 - value_); }
  bool is_plugin() const { return value_ == 1.0; }

 private:
  double value_;
};

/// Hyperparameters of the hierarchical shrinkage prior.
/**
 * theta | eta, lambda ~ N_l(0, eta^{-1} (D^{-1} + (1-alpha)/2 I)^{-1} (C/lambda - I)),
 * mu | eta, lambda ~ N_{k-l}(0, eta^{-1} (gamma/lambda - 1) I),
 * eta ~ eta^a, lambda ~ lambda^a (1-lambda)^b on (0, 1).
 *
 * The mixing variable lambda is integrated out analytically and never sampled.
 */
struct PriorSpec {
  Vector c;            ///< diagonal of C, every entry >= 1
  double a = 0.0;      ///< must exceed -k/2 - 1
  double gamma = 1.0;  ///< gamma_prior >= 1

  static PriorSpec identity(int l, double a, double gamma = 1.0);

  /// b(alpha) = (1-alpha) m / 4 + (n-k)/2 - 1.
  double b(Alpha alpha, int m, int n, int k) const;
  /// nu = (k + 2a + 2) / (n - k).
  double nu(int n, int k) const;

  void validate(const CanonicalProblem& problem) const;
};

struct ShrinkageComponents {
  Matrix Sigma_U;
  Vector theta_B;
  Matrix Sigma_B;
  double R = 0.0;
};

ShrinkageComponents shrinkage_components(const CanonicalProblem& problem, const PriorSpec& prior,
                                         Alpha alpha, const Vector& v);

/// How a density's normalizing constant was obtained.
struct NormalizationCertificate {
  enum class Kind { kClosedForm, kImportanceSampled };
  Kind kind = Kind::kClosedForm;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double std_error = 0.0;  ///< standard error of log Z (delta method)
  double effective_sample_size = 0.0;
};

/// Log-density known up to an additive constant.
struct UnnormalizedDensity {
  int dim = 0;
  std::function<double(const Vector&)> log_unnormalized;
};

/// An evaluable predictive density over ytilde.
/**
 * log_density(y) = log_unnormalized(y) - log_norm_const, where exp(log_norm_const) is the
 * integral of exp(log_unnormalized). Densities without an exact sampler keep the proposal
 * they were normalized against so that expectations under them can be importance weighted.
 */
struct PredictiveDensity {
  int dim = 0;
  std::function<double(const Vector&)> log_unnormalized;
  double log_norm_const = 0.0;
  std::optional<NormalizationCertificate> certificate;
  std::function<Vector(CounterRng&)> sampler;
  std::shared_ptr<const PredictiveDensity> proposal;

  double log_density(const Vector& y) const { return log_unnormalized(y) - log_norm_const; }
  bool has_sampler() const { return static_cast<bool>(sampler); }
};

/// log of {(y - Qv)' Sigma_U^{-1} (y - Qv) + s}^{-m/2 - (n-k)/(1-alpha)}.
double log_best_invariant(const CanonicalProblem& problem, const CanonicalObservation& obs,
                          Alpha alpha, const Vector& ytilde);

/// log of the integral of exp(log_best_invariant) over ytilde (multivariate-t constant).
double best_invariant_normalizer(const CanonicalProblem& problem, const CanonicalObservation& obs,
                                 Alpha alpha);

/// The best invariant density, normalized in closed form, with an exact sampler.
PredictiveDensity best_invariant_density(const CanonicalProblem& problem,
                                         const CanonicalObservation& obs, Alpha alpha);

/// Unnormalized log of the generalized Bayes density for alpha in [-1, 1).
double log_shrinkage_bayes(const CanonicalProblem& problem, const PriorSpec& prior,
                           const CanonicalObservation& obs, Alpha alpha, const Vector& ytilde);

UnnormalizedDensity shrinkage_bayes_unnormalized(const CanonicalProblem& problem,
                                                 const PriorSpec& prior,
                                                 const CanonicalObservation& obs, Alpha alpha);

/// Minimum ratio of effective sample size to sample count accepted by normalize_density.
inline constexpr double kMinEffectiveSampleFraction = 0.05;

/// Importance-sampling estimate of the normalizing constant of `target`.
/**
 * Draws n_samples from `proposal` on the stream (seed, index). Throws NormalizationError
 * when the effective sample size falls below 5% of n_samples or a weight is not finite.
 */
PredictiveDensity normalize_density(const UnnormalizedDensity& target,
                                    const PredictiveDensity& proposal, std::size_t n_samples,
                                    std::uint64_t seed, std::uint64_t index = 0);

/// Generalized Bayes density for alpha < 1, normalized against the best invariant density.
PredictiveDensity shrinkage_bayes_density(const CanonicalProblem& problem, const PriorSpec& prior,
                                          const CanonicalObservation& obs, Alpha alpha,
                                          std::size_t n_samples, std::uint64_t seed,
                                          std::uint64_t index = 0);

/// Plug-in estimates (theta_hat, sigma2_hat) and the statistic W they were computed from.
struct PluginEstimate {
  Vector theta_hat;
  double sigma2_hat = 0.0;
  double W = 0.0;
};

/// Generalized Bayes estimators under the alpha = 1 loss.
PluginEstimate plugin_bayes_estimators(const CanonicalProblem& problem, const PriorSpec& prior,
                                       const CanonicalObservation& obs);

/// N_m(Q theta_hat, sigma2_hat I_m) with its closed-form constant.
PredictiveDensity plugin_density(const PluginEstimate& est, const CanonicalProblem& problem);

/// theta_hat = V and sigma2_hat = S / (n - k); W uses C = I and gamma = 1.
PluginEstimate umvu_estimators(const CanonicalProblem& problem, const CanonicalObservation& obs);

/// min(S/(n-k), (V'D^{-1}V + S)/(l + n - k)).
double stein_variance(const CanonicalObservation& obs, const Vector& d, int n, int k);

/// min(S/(n-k), (|V*|^2 + S)/(n - l)); requires a nonempty V*.
double stein_variance_star(const CanonicalObservation& obs, int n, int k);

struct AlphaLimitTable {
  std::vector<double> alphas;
  std::vector<Vector> points;
  Matrix gaps;                      ///< alphas x points, |log p_alpha - log plugin|
  std::vector<double> log_norm_se;  ///< per alpha
  /// True iff every column decreases strictly along the alpha sequence.
  bool decreasing() const;
};

AlphaLimitTable alpha_limit_check(const CanonicalProblem& problem, const PriorSpec& prior,
                                  const CanonicalObservation& obs, const std::vector<Vector>& points,
                                  const std::vector<double>& alphas, std::size_t n_samples,
                                  std::uint64_t seed);

struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  /// |lhs - rhs| / (1 + |lhs|).
  double relative_gap() const;
};

/// Both sides of the completed-square identity for G(ytilde, v, F, D*, Q).
IdentityResidual lemma_identity_residual(const Vector& f, const Vector& d_star, const Matrix& Q,
                                         const Vector& ytilde, const Vector& v);

/// First-line definitions of the quadratic forms A and B against their closed forms.
struct QuadraticFormConsistency {
  IdentityResidual a;
  IdentityResidual b;
};

QuadraticFormConsistency quadratic_form_consistency(const Matrix& Q, const Vector& d,
                                                    const Vector& c, Alpha alpha,
                                                    const Vector& ytilde, const Vector& v);

}  // namespace bayespred

#endif
