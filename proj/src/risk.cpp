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

#include "bayespred/risk.hpp"

#include <cmath>
#include <limits>

#include "bayespred/error.hpp"
#include "bayespred/parallel.hpp"
#include "bayespred/rng.hpp"
#include "bayespred/special.hpp"

namespace bayespred {

double f_alpha(double z, Alpha alpha) {
  if (!(z > 0.0)) {
    throw DomainError("f_alpha: z must be positive");
  }
  const double a = alpha.value();
  if (a == 1.0) {
    return z * std::log(z);
  }
  if (a == -1.0) {
    return -std::log(z);
  }
  return 4.0 * (1.0 - std::pow(z, 0.5 * (1.0 + a))) / (1.0 - a * a);
}

double f_alpha_centered(double z, Alpha alpha) {
  if (!(z > 0.0)) {
    throw DomainError("f_alpha_centered: z must be positive");
  }
  const double a = alpha.value();
  if (a == 1.0) {
    return z * std::log(z) - z + 1.0;
  }
  return f_alpha(z, alpha) + 2.0 * (z - 1.0) / (1.0 - a);
}

double stein_loss(double sigma2_hat, double sigma2) {
  if (!(sigma2_hat > 0.0) || !(sigma2 > 0.0)) {
    throw DomainError("stein_loss: variances must be positive");
  }
  const double ratio = sigma2_hat / sigma2;
  return ratio - std::log(ratio) - 1.0;
}

double d1_loss_plugin(const Vector& theta_hat, double sigma2_hat, const Vector& theta, double sigma2,
                      int m) {
  if (theta_hat.size() != theta.size()) {
    throw DimensionError("d1_loss_plugin: theta dimensions differ");
  }
  return 0.5 * ((theta_hat - theta).squaredNorm() / sigma2 + m * stein_loss(sigma2_hat, sigma2));
}

double minimax_risk(const Vector& d, int m, int n, int k) {
  if (n <= k) {
    throw DomainError("minimax_risk: need n > k");
  }
  const double half_dof = 0.5 * (n - k);
  return 0.5 * (d.sum() + m * (std::log(half_dof) - digamma(half_dof)));
}

RiskEstimate summarize(std::span<const double> values, std::uint64_t seed) {
  RiskEstimate est;
  est.reps = values.size();
  est.seed = seed;
  if (values.empty()) {
    est.mean = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  const double n = static_cast<double>(values.size());
  est.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> squared(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      squared[i] = (values[i] - est.mean) * (values[i] - est.mean);
    }
    est.std_error = std::sqrt(pairwise_sum(squared) / (n - 1.0) / n);
  }
  return est;
}

RiskEstimate alpha_divergence_mc(const PredictiveDensity& phat, const Vector& theta, double eta,
                                 const CanonicalProblem& problem, Alpha alpha, std::size_t n_mc,
                                 std::uint64_t seed, std::uint64_t index) {
  if (!phat.certificate) {
    throw NormalizationError("alpha_divergence_mc: density carries no normalization certificate");
  }
  if (phat.dim != problem.m || theta.size() != problem.l) {
    throw DimensionError("alpha_divergence_mc: dimensions do not match the problem");
  }
  if (!(eta > 0.0) || n_mc < kMinInnerDraws) {
    throw DomainError("alpha_divergence_mc: need eta > 0 and at least 100 draws");
  }
  const Vector truth_mean = problem.Q * theta;
  const double truth_sd = 1.0 / std::sqrt(eta);
  const double truth_log_const = -0.5 * problem.m * std::log(2.0 * std::numbers::pi / eta);
  auto log_truth = [&](const Vector& y) {
    return truth_log_const - 0.5 * eta * (y - truth_mean).squaredNorm();
  };

  CounterRng rng(seed, index, Stream::kInnerMonteCarlo);
  std::vector<double> terms(n_mc);
  const double a = alpha.value();

  if (a <= 0.0) {
    const double delta = 0.5 * (1.0 + a);
    for (std::size_t i = 0; i < n_mc; ++i) {
      Vector y(problem.m);
      for (int j = 0; j < problem.m; ++j) {
        y(j) = truth_mean(j) + truth_sd * rng.normal();
      }
      const double log_z = phat.log_density(y) - log_truth(y);
      terms[i] = a == -1.0 ? -log_z : -std::expm1(delta * log_z) / (delta * (1.0 - delta));
    }
    RiskEstimate est = summarize(terms, seed);
    return est;
  }

  const double eps = 0.5 * (1.0 - a);
  auto integrand = [&](double log_z) {
    return a == 1.0 ? log_z : -std::expm1(-eps * log_z) / (eps * (1.0 - eps));
  };
  if (phat.has_sampler()) {
    for (std::size_t i = 0; i < n_mc; ++i) {
      const Vector y = phat.sampler(rng);
      terms[i] = integrand(phat.log_density(y) - log_truth(y));
    }
    return summarize(terms, seed);
  }
  if (!phat.proposal || !phat.proposal->has_sampler()) {
    throw NormalizationError("alpha_divergence_mc: density can be neither sampled nor weighted");
  }
  // Self-normalized importance sampling through the proposal used for normalization.
  std::vector<double> log_weights(n_mc);
  double max_log_weight = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_mc; ++i) {
    const Vector y = phat.proposal->sampler(rng);
    const double log_p = phat.log_density(y);
    log_weights[i] = log_p - phat.proposal->log_density(y);
    max_log_weight = std::max(max_log_weight, log_weights[i]);
    terms[i] = integrand(log_p - log_truth(y));
  }
  std::vector<double> weights(n_mc);
  std::vector<double> weighted(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    weights[i] = std::exp(log_weights[i] - max_log_weight);
    weighted[i] = weights[i] * terms[i];
  }
  const double weight_sum = pairwise_sum(weights);
  RiskEstimate est;
  est.reps = n_mc;
  est.seed = seed;
  est.mean = pairwise_sum(weighted) / weight_sum;
  std::vector<double> spread(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double dev = weights[i] * (terms[i] - est.mean);
    spread[i] = dev * dev;
  }
  est.std_error = std::sqrt(pairwise_sum(spread)) / weight_sum;
  return est;
}

std::vector<double> d1_losses(const PluginProcedure& procedure, const CanonicalProblem& problem,
                              const CanonicalParams& params, std::size_t reps, std::uint64_t seed,
                              unsigned threads) {
  std::vector<double> losses(reps);
  const double sigma2 = params.sigma2();
  parallel_for(reps, threads, [&](std::size_t r) {
    const CanonicalObservation obs = simulate_observation(problem, params, seed, r);
    const PluginEstimate est = procedure(obs);
    losses[r] = d1_loss_plugin(est.theta_hat, est.sigma2_hat, params.theta, sigma2, problem.m);
  });
  return losses;
}

RiskEstimate risk_d1_mc(const PluginProcedure& procedure, const CanonicalProblem& problem,
                        const CanonicalParams& params, std::size_t reps, std::uint64_t seed,
                        unsigned threads) {
  if (reps < kMinReplications) {
    throw DomainError("risk_d1_mc: need at least 100 replications");
  }
  const std::vector<double> losses = d1_losses(procedure, problem, params, reps, seed, threads);
  return summarize(losses, seed);
}

std::vector<double> alpha_losses(const DensityBuilder& builder, const CanonicalProblem& problem,
                                 const CanonicalParams& params, Alpha alpha, std::size_t reps_outer,
                                 std::size_t n_mc_inner, std::uint64_t seed, unsigned threads) {
  if (reps_outer < kMinOuterReplications) {
    throw DomainError("risk: need at least 50 outer replications");
  }
  std::vector<double> losses(reps_outer);
  parallel_for(reps_outer, threads, [&](std::size_t r) {
    const CanonicalObservation obs = simulate_observation(problem, params, seed, r);
    try {
      const PredictiveDensity density = builder(obs, r);
      losses[r] = alpha_divergence_mc(density, params.theta, params.eta, problem, alpha,
                                      n_mc_inner, seed, r)
                      .mean;
    } catch (const NormalizationError&) {
      losses[r] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return losses;
}

RiskEstimate summarize_with_exclusions(std::span<const double> losses, std::uint64_t seed) {
  std::vector<double> kept;
  kept.reserve(losses.size());
  for (double x : losses) {
    if (!std::isnan(x)) {
      kept.push_back(x);
    }
  }
  const std::size_t excluded = losses.size() - kept.size();
  if (static_cast<double>(excluded) > kMaxExclusionFraction * static_cast<double>(losses.size())) {
    throw MonteCarloGuardError("risk: " + std::to_string(excluded) + " of " +
                               std::to_string(losses.size()) +
                               " replications failed normalization (ceiling 1%)");
  }
  RiskEstimate est = summarize(kept, seed);
  est.excluded = excluded;
  return est;
}

RiskEstimate risk_alpha_mc(const DensityBuilder& builder, const CanonicalProblem& problem,
                           const CanonicalParams& params, Alpha alpha, std::size_t reps_outer,
                           std::size_t n_mc_inner, std::uint64_t seed, unsigned threads) {
  const std::vector<double> losses =
      alpha_losses(builder, problem, params, alpha, reps_outer, n_mc_inner, seed, threads);
  return summarize_with_exclusions(losses, seed);
}

double phi_nu(double w, double nu) { return nu * w / (nu + 1.0 + w); }

double phi_nu_derivative(double w, double nu) {
  const double denom = nu + 1.0 + w;
  return nu * (nu + 1.0) / (denom * denom);
}

ChiSquareIdentityResult chi_square_identity_check(const std::function<double(double)>& phi,
                                                  const std::function<double(double)>& phi_prime,
                                                  int dof, int numerator_dof, std::size_t n_mc,
                                                  std::uint64_t seed, double sigma2) {
  if (dof < 1 || numerator_dof < 1 || !(sigma2 > 0.0) || n_mc < 2) {
    throw DomainError("chi_square_identity_check: invalid arguments");
  }
  CounterRng rng(seed, 0, Stream::kIdentity);
  std::vector<double> lhs(n_mc);
  std::vector<double> rhs(n_mc);
  std::vector<double> diff(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double s = sigma2 * rng.chi_square(dof);
    const double u = sigma2 * rng.chi_square(numerator_dof);
    const double w = u / s;
    const double ratio = phi(w) / w;
    lhs[i] = ratio * s / sigma2;
    rhs[i] = (dof + 2.0) * ratio - 2.0 * phi_prime(w);
    diff[i] = lhs[i] - rhs[i];
  }
  ChiSquareIdentityResult out;
  out.lhs = summarize(lhs, seed).mean;
  out.rhs = summarize(rhs, seed).mean;
  const RiskEstimate d = summarize(diff, seed);
  out.gap = d.mean;
  out.std_error = d.std_error;
  return out;
}

double log_inequality_max_violation(std::size_t grid_points) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double x = 0.99 * static_cast<double>(i) / static_cast<double>(grid_points + 1);
    const double lhs = -std::log1p(-x);
    const double rhs = x + 0.5 * x * x / (1.0 - x);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace bayespred
