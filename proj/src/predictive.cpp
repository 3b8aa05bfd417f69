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

#include "bayespred/predictive.hpp"

#include <cmath>
#include <numbers>

#include "bayespred/error.hpp"
#include "bayespred/special.hpp"

namespace bayespred {

namespace {

// Positive definiteness threshold: smallest eigenvalue above this fraction of the largest.
constexpr double kPdTolerance = 1e-12;

Eigen::LLT<Matrix> spd_factor(const Matrix& a, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(a, Eigen::EigenvaluesOnly);
  const Vector& ev = spectrum.eigenvalues();
  if (!(ev.minCoeff() > kPdTolerance * ev.maxCoeff())) {
    throw DomainError(std::string(what) + " is not positive definite");
  }
  return Eigen::LLT<Matrix>(a);
}

double quadratic(const Eigen::LLT<Matrix>& factor, const Vector& x) {
  return factor.matrixL().solve(x).squaredNorm();
}

double log_det(const Eigen::LLT<Matrix>& factor) {
  return 2.0 * factor.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

void require_below_one(Alpha alpha, const char* what) {
  if (alpha.is_plugin()) {
    throw UnsupportedError(std::string(what) + ": alpha = 1 has no Student-t form; use the plug-in density");
  }
}

void require_positive_s(const CanonicalObservation& obs, const char* what) {
  if (!(obs.S > 0.0)) {
    throw DegenerateObservationError(std::string(what) + ": S must be positive");
  }
}

void check_observation(const CanonicalProblem& problem, const CanonicalObservation& obs) {
  if (obs.V.size() != problem.l || obs.V_star.size() != problem.complement_dim()) {
    throw DimensionError("observation dimensions do not match the canonical problem");
  }
}

ShrinkageComponents components(const Matrix& Q, const Vector& d, const Vector& c, Alpha alpha,
                               const Vector& v) {
  const double h = alpha.half_complement();
  const Eigen::Index m = Q.rows();
  const Eigen::ArrayXd denom = c.array() + h * d.array();
  ShrinkageComponents out;
  out.Sigma_U = Matrix::Identity(m, m) / h + Q * d.asDiagonal() * Q.transpose();
  out.theta_B = ((c.array() - 1.0) / denom * v.array()).matrix();
  const Vector middle = ((c.array() - 1.0) * d.array() / denom).matrix();
  out.Sigma_B = Matrix::Identity(m, m) / h + Q * middle.asDiagonal() * Q.transpose();
  out.R = (v.array().square() * (h * d.array() + 1.0) / (d.array() * denom)).sum();
  return out;
}

// The two factors of the generalized Bayes density, with factorizations cached.
struct BestInvariantState {
  Eigen::LLT<Matrix> sigma_u;
  Vector center;
  double s = 0.0;
  double exponent = 0.0;  // -m/2 - (n-k)/(1-alpha)
  double dof = 0.0;       // 2(n-k)/(1-alpha)
  int m = 0;

  double operator()(const Vector& y) const {
    return exponent * std::log(quadratic(sigma_u, y - center) + s);
  }
};

BestInvariantState best_invariant_state(const CanonicalProblem& problem,
                                        const CanonicalObservation& obs, Alpha alpha) {
  require_below_one(alpha, "best invariant density");
  check_observation(problem, obs);
  require_positive_s(obs, "best invariant density");
  const double h = alpha.half_complement();
  BestInvariantState state;
  const Matrix sigma_u =
      Matrix::Identity(problem.m, problem.m) / h + problem.Q * problem.d.asDiagonal() * problem.Q.transpose();
  state.sigma_u = spd_factor(sigma_u, "Sigma_U");
  state.center = problem.Q * obs.V;
  state.s = obs.S;
  state.m = problem.m;
  state.exponent = -0.5 * problem.m - problem.residual_dof() / (1.0 - alpha.value());
  state.dof = 2.0 * problem.residual_dof() / (1.0 - alpha.value());
  return state;
}

struct ShrinkageFactorState {
  Eigen::LLT<Matrix> sigma_b;
  Vector center;
  double offset = 0.0;    // R + |v*|^2 / gamma + s
  double exponent = 0.0;  // -(k + 2a + 2)/(1 - alpha)

  double operator()(const Vector& y) const {
    return exponent * std::log(quadratic(sigma_b, y - center) + offset);
  }
};

ShrinkageFactorState shrinkage_factor_state(const CanonicalProblem& problem, const PriorSpec& prior,
                                            const CanonicalObservation& obs, Alpha alpha) {
  const ShrinkageComponents parts = shrinkage_components(problem, prior, alpha, obs.V);
  ShrinkageFactorState state;
  state.sigma_b = spd_factor(parts.Sigma_B, "Sigma_B");
  state.center = problem.Q * parts.theta_B;
  state.offset = parts.R + obs.S;
  if (problem.complement_dim() > 0) {
    state.offset += obs.V_star.squaredNorm() / prior.gamma;
  }
  state.exponent = -(problem.k + 2.0 * prior.a + 2.0) / (1.0 - alpha.value());
  return state;
}

}  // namespace

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= -1.0 && value <= 1.0)) {
    throw DomainError("alpha must lie in [-1, 1]");
  }
}

PriorSpec PriorSpec::identity(int l, double a, double gamma) {
  return PriorSpec{Vector::Ones(l), a, gamma};
}

double PriorSpec::b(Alpha alpha, int m, int n, int k) const {
  return (1.0 - alpha.value()) * m / 4.0 + (n - k) / 2.0 - 1.0;
}

double PriorSpec::nu(int n, int k) const { return (k + 2.0 * a + 2.0) / (n - k); }

void PriorSpec::validate(const CanonicalProblem& problem) const {
  if (c.size() != problem.l) {
    throw DimensionError("prior: C must have l diagonal entries");
  }
  if (!(c.minCoeff() >= 1.0) || !c.allFinite()) {
    throw DomainError("prior: every c_i must be >= 1");
  }
  if (!(a > -problem.k / 2.0 - 1.0)) {
    throw DomainError("prior: a must exceed -k/2 - 1");
  }
  if (!(gamma >= 1.0)) {
    throw DomainError("prior: gamma must be >= 1");
  }
}

ShrinkageComponents shrinkage_components(const CanonicalProblem& problem, const PriorSpec& prior,
                                         Alpha alpha, const Vector& v) {
  require_below_one(alpha, "shrinkage_components");
  prior.validate(problem);
  if (v.size() != problem.l) {
    throw DimensionError("shrinkage_components: v must have l entries");
  }
  return components(problem.Q, problem.d, prior.c, alpha, v);
}

double log_best_invariant(const CanonicalProblem& problem, const CanonicalObservation& obs,
                          Alpha alpha, const Vector& ytilde) {
  if (ytilde.size() != problem.m) {
    throw DimensionError("ytilde must have m entries");
  }
  return best_invariant_state(problem, obs, alpha)(ytilde);
}

double best_invariant_normalizer(const CanonicalProblem& problem, const CanonicalObservation& obs,
                                 Alpha alpha) {
  const BestInvariantState state = best_invariant_state(problem, obs, alpha);
  const double dof = state.dof;
  const double m = state.m;
  // Scale matrix of the multivariate t is (s / dof) Sigma_U.
  const double log_det_scale = m * std::log(state.s / dof) + log_det(state.sigma_u);
  return -0.5 * (dof + m) * std::log(state.s) - log_gamma(0.5 * (dof + m)) + log_gamma(0.5 * dof) +
         0.5 * m * std::log(dof * std::numbers::pi) + 0.5 * log_det_scale;
}

PredictiveDensity best_invariant_density(const CanonicalProblem& problem,
                                         const CanonicalObservation& obs, Alpha alpha) {
  auto state = std::make_shared<const BestInvariantState>(best_invariant_state(problem, obs, alpha));
  PredictiveDensity density;
  density.dim = problem.m;
  density.log_unnormalized = [state](const Vector& y) { return (*state)(y); };
  density.log_norm_const = best_invariant_normalizer(problem, obs, alpha);
  density.certificate = NormalizationCertificate{};
  const Matrix scale_root = std::sqrt(state->s / state->dof) * Matrix(state->sigma_u.matrixL());
  density.sampler = [state, scale_root](CounterRng& rng) {
    Vector z(state->m);
    for (int i = 0; i < state->m; ++i) {
      z(i) = rng.normal();
    }
    const double mixing = std::sqrt(state->dof / rng.chi_square(state->dof));
    return Vector(state->center + mixing * (scale_root * z));
  };
  return density;
}

double log_shrinkage_bayes(const CanonicalProblem& problem, const PriorSpec& prior,
                           const CanonicalObservation& obs, Alpha alpha, const Vector& ytilde) {
  if (ytilde.size() != problem.m) {
    throw DimensionError("ytilde must have m entries");
  }
  return shrinkage_bayes_unnormalized(problem, prior, obs, alpha).log_unnormalized(ytilde);
}

UnnormalizedDensity shrinkage_bayes_unnormalized(const CanonicalProblem& problem,
                                                 const PriorSpec& prior,
                                                 const CanonicalObservation& obs, Alpha alpha) {
  auto invariant = std::make_shared<const BestInvariantState>(best_invariant_state(problem, obs, alpha));
  auto factor = std::make_shared<const ShrinkageFactorState>(shrinkage_factor_state(problem, prior, obs, alpha));
  return UnnormalizedDensity{problem.m, [invariant, factor](const Vector& y) {
                               return (*invariant)(y) + (*factor)(y);
                             }};
}

PredictiveDensity normalize_density(const UnnormalizedDensity& target,
                                    const PredictiveDensity& proposal, std::size_t n_samples,
                                    std::uint64_t seed, std::uint64_t index) {
  if (!proposal.has_sampler() || !proposal.certificate) {
    throw NormalizationError("normalize_density: proposal must be normalized and samplable");
  }
  if (target.dim != proposal.dim) {
    throw DimensionError("normalize_density: target and proposal dimensions differ");
  }
  if (n_samples < 2) {
    throw DomainError("normalize_density: need at least two samples");
  }
  CounterRng rng(seed, index, Stream::kNormalization);
  std::vector<double> log_weights(n_samples);
  double max_log_weight = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector y = proposal.sampler(rng);
    const double lw = target.log_unnormalized(y) - proposal.log_density(y);
    if (!std::isfinite(lw)) {
      throw NormalizationError("normalize_density: non-finite importance weight");
    }
    log_weights[i] = lw;
    max_log_weight = std::max(max_log_weight, lw);
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - max_log_weight);
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double variance = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double ess = sum * sum / sum_sq;
  if (ess < kMinEffectiveSampleFraction * n) {
    throw NormalizationError("normalize_density: effective sample size " + std::to_string(ess) +
                             " below 5% of " + std::to_string(n_samples));
  }

  PredictiveDensity density;
  density.dim = target.dim;
  density.log_unnormalized = target.log_unnormalized;
  density.log_norm_const = max_log_weight + std::log(mean);
  NormalizationCertificate certificate;
  certificate.kind = NormalizationCertificate::Kind::kImportanceSampled;
  certificate.n_samples = n_samples;
  certificate.seed = seed;
  certificate.std_error = std::sqrt(variance / n) / mean;
  certificate.effective_sample_size = ess;
  density.certificate = certificate;
  density.proposal = std::make_shared<const PredictiveDensity>(proposal);
  return density;
}

PredictiveDensity shrinkage_bayes_density(const CanonicalProblem& problem, const PriorSpec& prior,
                                          const CanonicalObservation& obs, Alpha alpha,
                                          std::size_t n_samples, std::uint64_t seed,
                                          std::uint64_t index) {
  return normalize_density(shrinkage_bayes_unnormalized(problem, prior, obs, alpha),
                           best_invariant_density(problem, obs, alpha), n_samples, seed, index);
}

PluginEstimate plugin_bayes_estimators(const CanonicalProblem& problem, const PriorSpec& prior,
                                       const CanonicalObservation& obs) {
  prior.validate(problem);
  check_observation(problem, obs);
  require_positive_s(obs, "plugin_bayes_estimators");
  double numerator = (obs.V.array().square() / (prior.c.array() * problem.d.array())).sum();
  if (problem.complement_dim() > 0) {
    numerator += obs.V_star.squaredNorm() / prior.gamma;
  }
  PluginEstimate est;
  est.W = numerator / obs.S;
  const double nu = prior.nu(problem.n, problem.k);
  const double shrink = nu / (nu + 1.0 + est.W);
  est.theta_hat = ((1.0 - shrink / prior.c.array()) * obs.V.array()).matrix();
  est.sigma2_hat = (1.0 - shrink) * obs.S / problem.residual_dof();
  return est;
}

PredictiveDensity plugin_density(const PluginEstimate& est, const CanonicalProblem& problem) {
  if (!(est.sigma2_hat > 0.0)) {
    throw DomainError("plugin_density: sigma2_hat must be positive");
  }
  if (est.theta_hat.size() != problem.l) {
    throw DimensionError("plugin_density: theta_hat must have l entries");
  }
  const Vector mean = problem.Q * est.theta_hat;
  const double variance = est.sigma2_hat;
  const double sd = std::sqrt(variance);
  PredictiveDensity density;
  density.dim = problem.m;
  density.log_unnormalized = [mean, variance](const Vector& y) {
    return -0.5 * (y - mean).squaredNorm() / variance;
  };
  density.log_norm_const = 0.5 * problem.m * std::log(2.0 * std::numbers::pi * variance);
  density.certificate = NormalizationCertificate{};
  density.sampler = [mean, sd](CounterRng& rng) {
    Vector y(mean.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y(i) = mean(i) + sd * rng.normal();
    }
    return y;
  };
  return density;
}

PluginEstimate umvu_estimators(const CanonicalProblem& problem, const CanonicalObservation& obs) {
  check_observation(problem, obs);
  require_positive_s(obs, "umvu_estimators");
  PluginEstimate est;
  est.theta_hat = obs.V;
  est.sigma2_hat = obs.S / problem.residual_dof();
  est.W = ((obs.V.array().square() / problem.d.array()).sum() + obs.V_star.squaredNorm()) / obs.S;
  return est;
}

double stein_variance(const CanonicalObservation& obs, const Vector& d, int n, int k) {
  require_positive_s(obs, "stein_variance");
  if (d.size() != obs.V.size()) {
    throw DimensionError("stein_variance: D must match V");
  }
  const double l = static_cast<double>(obs.V.size());
  const double pooled = ((obs.V.array().square() / d.array()).sum() + obs.S) / (l + n - k);
  return std::min(obs.S / (n - k), pooled);
}

double stein_variance_star(const CanonicalObservation& obs, int n, int k) {
  require_positive_s(obs, "stein_variance_star");
  if (obs.V_star.size() == 0) {
    throw DimensionError("stein_variance_star: V* is empty (m >= k)");
  }
  const double l = static_cast<double>(obs.V.size());
  return std::min(obs.S / (n - k), (obs.V_star.squaredNorm() + obs.S) / (n - l));
}

bool AlphaLimitTable::decreasing() const {
  for (Eigen::Index j = 0; j < gaps.cols(); ++j) {
    for (Eigen::Index i = 1; i < gaps.rows(); ++i) {
      if (!(gaps(i, j) < gaps(i - 1, j))) {
        return false;
      }
    }
  }
  return true;
}

AlphaLimitTable alpha_limit_check(const CanonicalProblem& problem, const PriorSpec& prior,
                                  const CanonicalObservation& obs, const std::vector<Vector>& points,
                                  const std::vector<double>& alphas, std::size_t n_samples,
                                  std::uint64_t seed) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] < 1.0) || (i > 0 && !(alphas[i] > alphas[i - 1]))) {
      throw DomainError("alpha_limit_check: alphas must increase and stay below 1");
    }
  }
  const PredictiveDensity limit = plugin_density(plugin_bayes_estimators(problem, prior, obs), problem);
  AlphaLimitTable table;
  table.alphas = alphas;
  table.points = points;
  table.gaps.resize(static_cast<Eigen::Index>(alphas.size()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const PredictiveDensity density =
        shrinkage_bayes_density(problem, prior, obs, Alpha(alphas[i]), n_samples, seed, i);
    table.log_norm_se.push_back(density.certificate->std_error);
    for (std::size_t j = 0; j < points.size(); ++j) {
      table.gaps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::abs(density.log_density(points[j]) - limit.log_density(points[j]));
    }
  }
  return table;
}

double IdentityResidual::relative_gap() const { return std::abs(lhs - rhs) / (1.0 + std::abs(lhs)); }

IdentityResidual lemma_identity_residual(const Vector& f, const Vector& d_star, const Matrix& Q,
                                         const Vector& ytilde, const Vector& v) {
  const Eigen::Index l = Q.cols();
  const Eigen::Index m = Q.rows();
  if (f.size() != l || d_star.size() != l || v.size() != l || ytilde.size() != m) {
    throw DimensionError("lemma_identity_residual: inconsistent dimensions");
  }
  if (!(d_star.cwiseAbs().minCoeff() > 0.0)) {
    throw DomainError("lemma_identity_residual: D* must be invertible");
  }
  const Eigen::ArrayXd inner = 1.0 + d_star.array() * (1.0 - f.array());
  if (!(inner.abs().minCoeff() > 1e-14)) {
    throw DomainError("lemma_identity_residual: I + D*(I - F) is singular");
  }
  const Eigen::ArrayXd ds = d_star.array();
  const Vector u = Q.transpose() * ytilde + (v.array() / ds).matrix();

  IdentityResidual out;
  out.lhs = ytilde.squaredNorm() + (v.array().square() / ds).sum() -
            (u.array().square() * f.array() / (1.0 + 1.0 / ds)).sum();

  const Eigen::ArrayXd k_inv = 1.0 / inner;
  const Vector center = Q * (f.array() * k_inv * v.array()).matrix();
  const Matrix weight = Matrix::Identity(m, m) +
                        Q * (f.array() * ds * k_inv).matrix().asDiagonal() * Q.transpose();
  const Vector diff = ytilde - center;
  out.rhs = diff.dot(weight.partialPivLu().solve(diff)) +
            (v.array().square() * (ds + 1.0) * (1.0 - f.array()) / ds * k_inv).sum();
  return out;
}

QuadraticFormConsistency quadratic_form_consistency(const Matrix& Q, const Vector& d,
                                                    const Vector& c, Alpha alpha,
                                                    const Vector& ytilde, const Vector& v) {
  require_below_one(alpha, "quadratic_form_consistency");
  const double h = alpha.half_complement();
  const Vector d_star = h * d;
  const ShrinkageComponents parts = components(Q, d, c, alpha, v);
  const Eigen::ArrayXd ds = d_star.array();
  const Vector u = Q.transpose() * ytilde + (v.array() / ds).matrix();
  const double base = ytilde.squaredNorm() + (v.array().square() / ds).sum();

  QuadraticFormConsistency out;
  // A: first-line definition (F = I) against (2/(1-alpha)) (y - Qv)' Sigma_U^{-1} (y - Qv).
  out.a.lhs = base - (u.array().square() / (1.0 + 1.0 / ds)).sum();
  const Vector du = ytilde - Q * v;
  out.a.rhs = du.dot(parts.Sigma_U.ldlt().solve(du)) / h;
  // B: first-line definition (F = I - C^{-1}) against the Sigma_B form plus R.
  const Eigen::ArrayXd f = 1.0 - 1.0 / c.array();
  out.b.lhs = base - (u.array().square() * f / (1.0 + 1.0 / ds)).sum();
  const Vector db = ytilde - Q * parts.theta_B;
  out.b.rhs = (db.dot(parts.Sigma_B.ldlt().solve(db)) + parts.R) / h;
  return out;
}

}  // namespace bayespred
