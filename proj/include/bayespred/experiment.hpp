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

#ifndef BAYESPRED_EXPERIMENT_HPP
#define BAYESPRED_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayespred/bounds.hpp"
#include "bayespred/canonical.hpp"
#include "bayespred/identities.hpp"
#include "bayespred/io.hpp"
#include "bayespred/predictive.hpp"

namespace bayespred {

/// A parsed experiment document with the master seed and worker count resolved.
struct ExperimentConfig {
  Json document;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

ExperimentConfig load_config(const Json& document, std::optional<std::uint64_t> seed_override,
                             std::optional<unsigned> threads_override);

/// Design matrices from the "design" block: as1, random, explicit or csv.
DesignInput build_design(const ExperimentConfig& config);

CanonicalProblem build_problem(const ExperimentConfig& config);

/// Prior after optional C rescaling and nu resolution.
struct ResolvedPrior {
  PriorSpec prior;
  NuBounds bounds;
  double scale = 1.0;
  double nu = 0.0;
};

ResolvedPrior resolve_prior(const ExperimentConfig& config, const CanonicalProblem& problem);

struct ParameterPoint {
  Vector theta;
  Vector mu;
  double theta_norm = 0.0;  ///< the requested grid norm, or |theta| for explicit points
  double sigma2 = 1.0;
  CanonicalParams params() const;
};

std::vector<ParameterPoint> parameter_grid(const ExperimentConfig& config,
                                           const CanonicalProblem& problem);

struct RiskRow {
  std::string procedure;
  double alpha = 1.0;
  double theta_norm = 0.0;
  double sigma2 = 1.0;
  std::size_t reps = 0;
  double risk_mean = 0.0;
  double risk_se = 0.0;
  /// Exact minimax risk at alpha = 1; the simulated best-invariant risk otherwise.
  double minimax_risk = 0.0;
  bool dominates = false;
};

std::vector<RiskRow> run_risk_compare(const ExperimentConfig& config,
                                      const CanonicalProblem& problem);

std::string risk_csv(const std::vector<RiskRow>& rows);

Json canonicalize_report(const ExperimentConfig& config, const CanonicalProblem& problem);

Json bounds_report(const ExperimentConfig& config);

IdentitySuiteConfig identity_config(const ExperimentConfig& config);

Json identity_report_json(const IdentityReport& report);

/// Density grid CSV: y1..ym, log_density_unnormalized, log_norm_const, log_density.
std::string density_eval(const ExperimentConfig& config, const CanonicalProblem& problem);

}  // namespace bayespred

#endif
