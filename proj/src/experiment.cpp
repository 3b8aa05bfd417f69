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

#include "bayespred/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "bayespred/error.hpp"
#include "bayespred/risk.hpp"
#include "bayespred/rng.hpp"

namespace bayespred {

namespace {

const Json& block(const ExperimentConfig& config, const char* name) {
  static const Json empty = Json::object();
  const Json& doc = config.document;
  if (!doc.contains(name)) {
    return empty;
  }
  const Json& out = doc.at(name);
  if (!out.is_object()) {
    throw ConfigError(std::string(name) + ": expected an object");
  }
  return out;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

int get_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw ConfigError(std::string("missing integer field ") + key);
  }
  return j.at(key).get<int>();
}

Matrix gaussian_matrix(std::uint64_t seed, std::uint64_t index, int rows, int cols) {
  CounterRng rng(seed, index, Stream::kDesign);
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) = rng.normal();
    }
  }
  return out;
}

Matrix matrix_source(const Json& design, const char* key) {
  const Json& j = design.at(key);
  if (j.is_string()) {
    return read_matrix_csv(j.get<std::string>());
  }
  return matrix_from_json(j, key);
}

std::size_t count_field(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
    throw ConfigError(std::string(key) + ": expected a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

std::vector<double> alpha_list(const ExperimentConfig& config) {
  const Json& doc = config.document;
  if (!doc.contains("alphas")) {
    return {1.0};
  }
  std::vector<double> out;
  for (const Json& a : doc.at("alphas")) {
    if (!a.is_number()) {
      throw ConfigError("alphas: expected numbers");
    }
    out.push_back(Alpha(a.get<double>()).value());
  }
  return out;
}

bool is_density_procedure(const std::string& name) {
  return name == "best_invariant" || name == "generalized_bayes";
}

std::vector<std::string> procedure_list(const ExperimentConfig& config,
                                        const CanonicalProblem& problem) {
  static const std::vector<std::string> known = {"umvu",       "shrinkage",      "stein",
                                                 "stein_star", "best_invariant", "generalized_bayes"};
  const Json& doc = config.document;
  std::vector<std::string> out;
  if (doc.contains("procedures")) {
    for (const Json& p : doc.at("procedures")) {
      const std::string name = p.get<std::string>();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown procedure " + name);
      }
      if (name == "stein_star" && problem.complement_dim() == 0) {
        throw ConfigError("stein_star needs a design with m < k");
      }
      out.push_back(name);
    }
    return out;
  }
  for (const std::string& name : known) {
    if (name != "stein_star" || problem.complement_dim() > 0) {
      out.push_back(name);
    }
  }
  return out;
}

PluginProcedure plugin_procedure(const std::string& name, const CanonicalProblem& problem,
                                 const PriorSpec& prior) {
  if (name == "umvu") {
    return [&problem](const CanonicalObservation& obs) { return umvu_estimators(problem, obs); };
  }
  if (name == "shrinkage") {
    return [&problem, prior](const CanonicalObservation& obs) {
      return plugin_bayes_estimators(problem, prior, obs);
    };
  }
  if (name == "stein") {
    return [&problem](const CanonicalObservation& obs) {
      PluginEstimate est = umvu_estimators(problem, obs);
      est.sigma2_hat = stein_variance(obs, problem.d, problem.n, problem.k);
      return est;
    };
  }
  if (name == "stein_star") {
    return [&problem](const CanonicalObservation& obs) {
      PluginEstimate est = umvu_estimators(problem, obs);
      est.sigma2_hat = stein_variance_star(obs, problem.n, problem.k);
      return est;
    };
  }
  throw ConfigError("not a plug-in procedure: " + name);
}

std::string format_flag(bool value) { return value ? "true" : "false"; }

Json finite_or_null(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

}  // namespace

ExperimentConfig load_config(const Json& document, std::optional<std::uint64_t> seed_override,
                             std::optional<unsigned> threads_override) {
  if (!document.is_object()) {
    throw ConfigError("config: expected a JSON object");
  }
  ExperimentConfig config;
  config.document = document;
  config.seed = get_or<std::uint64_t>(document, "seed", 0);
  config.threads = get_or<unsigned>(document, "threads", 1);
  if (seed_override) {
    config.seed = *seed_override;
  }
  if (threads_override) {
    config.threads = *threads_override;
  }
  if (config.threads == 0) {
    throw ConfigError("threads must be positive");
  }
  return config;
}

DesignInput build_design(const ExperimentConfig& config) {
  const Json& design = block(config, "design");
  const std::string type = get_or<std::string>(design, "type", "as1");
  DesignInput out;
  if (type == "as1") {
    const int m = get_int(design, "m");
    const int k = get_int(design, "k");
    const int replicates = get_int(design, "N");
    if (!(m >= k && k >= 3) || replicates < 1) {
      throw ConfigError("as1 design needs m >= k >= 3 and N >= 1");
    }
    if (design.contains("n") && get_int(design, "n") != m * replicates) {
      throw ConfigError("as1 design needs n = m N");
    }
    out.Xtilde = design.contains("Xtilde") ? matrix_source(design, "Xtilde")
                                           : gaussian_matrix(config.seed, 0, m, k);
    if (out.Xtilde.rows() != m || out.Xtilde.cols() != k) {
      throw ConfigError("as1 design: Xtilde must be m x k");
    }
    out.X = replicated_design(out.Xtilde, replicates);
  } else if (type == "random") {
    const int n = get_int(design, "n");
    const int k = get_int(design, "k");
    const int m = get_int(design, "m");
    if (n <= k || k < 1 || m < 1) {
      throw ConfigError("random design needs n > k >= 1 and m >= 1");
    }
    out.X = gaussian_matrix(config.seed, 1, n, k);
    out.Xtilde = gaussian_matrix(config.seed, 2, m, k);
  } else if (type == "explicit") {
    if (!design.contains("X") || !design.contains("Xtilde")) {
      throw ConfigError("explicit design needs X and Xtilde");
    }
    out.X = matrix_source(design, "X");
    out.Xtilde = matrix_source(design, "Xtilde");
  } else {
    throw ConfigError("unknown design type " + type);
  }
  if (design.contains("y")) {
    out.y = vector_from_json(design.at("y"), "y");
  }
  return out;
}

CanonicalProblem build_problem(const ExperimentConfig& config) {
  const DesignInput design = build_design(config);
  return canonicalize(design.X, design.Xtilde);
}

ResolvedPrior resolve_prior(const ExperimentConfig& config, const CanonicalProblem& problem) {
  const Json& spec = block(config, "prior");
  ResolvedPrior out;
  Vector c = Vector::Ones(problem.l);
  if (spec.contains("C") && !spec.at("C").is_string()) {
    c = vector_from_json(spec.at("C"), "C");
  } else if (spec.contains("C") && spec.at("C").get<std::string>() != "identity") {
    throw ConfigError("prior.C: expected \"identity\" or a list of diagonal entries");
  }
  if (c.size() != problem.l) {
    throw ConfigError("prior.C: needs l entries");
  }
  if (get_or<bool>(spec, "rescale", true)) {
    out.scale = rescale_C_for_positivity(problem.d, c, problem.m, problem.n, problem.k);
    c *= out.scale;
  }
  out.bounds = nu_limits(problem.d, c, problem.m, problem.n, problem.k);
  const double gamma = get_or<double>(spec, "gamma", 1.0);
  if (spec.contains("a") && spec.contains("nu")) {
    throw ConfigError("prior: give a or nu, not both");
  }
  if (spec.contains("a")) {
    out.prior = PriorSpec{c, spec.at("a").get<double>(), gamma};
    out.nu = out.prior.nu(problem.n, problem.k);
  } else {
    const bool use_max = !spec.contains("nu") || (spec.at("nu").is_string() &&
                                                  spec.at("nu").get<std::string>() == "max");
    if (use_max) {
      if (!out.bounds.positive) {
        throw ConfigError("prior: nu_max is not positive for this design and C");
      }
      out.nu = out.bounds.nu_max;
    } else {
      out.nu = spec.at("nu").get<double>();
    }
    out.prior = PriorSpec{c, a_of_nu(problem.k, out.nu, problem.n), gamma};
  }
  out.prior.validate(problem);
  return out;
}

CanonicalParams ParameterPoint::params() const {
  CanonicalParams p;
  p.theta = theta;
  p.mu = mu;
  p.eta = 1.0 / sigma2;
  return p;
}

std::vector<ParameterPoint> parameter_grid(const ExperimentConfig& config,
                                           const CanonicalProblem& problem) {
  const Json& doc = config.document;
  const int complement = problem.complement_dim();
  std::vector<ParameterPoint> out;
  auto check_sigma2 = [](double s) {
    if (!(s > 0.0)) {
      throw ConfigError("sigma2 values must be positive");
    }
    return s;
  };
  if (doc.contains("points")) {
    for (const Json& p : doc.at("points")) {
      ParameterPoint point;
      point.theta = vector_from_json(p.at("theta"), "theta");
      point.mu = p.contains("mu") ? vector_from_json(p.at("mu"), "mu") : Vector::Zero(complement);
      point.sigma2 = check_sigma2(get_or<double>(p, "sigma2", 1.0));
      if (point.theta.size() != problem.l || point.mu.size() != complement) {
        throw ConfigError("points: theta needs l entries and mu k - l entries");
      }
      point.theta_norm = point.theta.norm();
      out.push_back(std::move(point));
    }
    return out;
  }
  if (!doc.contains("grid")) {
    return out;
  }
  const Json& grid = doc.at("grid");
  std::vector<double> norms = get_or<std::vector<double>>(grid, "theta_norms", {});
  std::vector<double> variances = get_or<std::vector<double>>(grid, "sigma2", {1.0});
  std::vector<Vector> directions;
  if (grid.contains("directions")) {
    for (const Json& d : grid.at("directions")) {
      Vector dir = vector_from_json(d, "directions");
      if (dir.size() != problem.l || !(dir.norm() > 0.0)) {
        throw ConfigError("directions: need nonzero vectors with l entries");
      }
      directions.push_back(dir.normalized());
    }
  } else {
    directions.push_back(Vector::Unit(problem.l, 0));
    if (problem.l > 1) {
      directions.push_back(Vector::Ones(problem.l).normalized());
    }
  }
  const Vector mu = grid.contains("mu") ? vector_from_json(grid.at("mu"), "mu")
                                        : Vector::Zero(complement);
  if (mu.size() != complement) {
    throw ConfigError("grid.mu: needs k - l entries");
  }
  for (double s : variances) {
    check_sigma2(s);
    for (double r : norms) {
      if (r < 0.0) {
        throw ConfigError("theta_norms must be nonnegative");
      }
      const std::size_t count = r == 0.0 ? 1 : directions.size();
      for (std::size_t i = 0; i < count; ++i) {
        ParameterPoint point;
        point.theta = r == 0.0 ? Vector::Zero(problem.l) : Vector(r * directions[i]);
        point.theta_norm = r;
        point.mu = mu;
        point.sigma2 = s;
        out.push_back(std::move(point));
      }
    }
  }
  return out;
}

std::vector<RiskRow> run_risk_compare(const ExperimentConfig& config,
                                      const CanonicalProblem& problem) {
  const Json& doc = config.document;
  const std::vector<double> alphas = alpha_list(config);
  const std::vector<std::string> procedures = procedure_list(config, problem);
  const std::vector<ParameterPoint> points = parameter_grid(config, problem);
  const std::size_t reps = count_field(doc, "reps", 20000);
  const std::size_t reps_outer = count_field(doc, "reps_outer", 2000);
  const std::size_t n_inner = count_field(doc, "n_mc_inner", 2000);
  const std::size_t n_norm = count_field(doc, "n_norm_samples", 20000);
  const bool claim_allowed = problem.residual_dof() >= 2;

  std::optional<ResolvedPrior> prior;
  auto need_prior = [&]() -> const PriorSpec& {
    if (!prior) {
      prior = resolve_prior(config, problem);
    }
    return prior->prior;
  };

  // Best-invariant losses per (alpha, point), shared by every procedure as the benchmark.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> benchmark_losses;

  std::vector<RiskRow> rows;
  for (const std::string& name : procedures) {
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      const double alpha_value = alphas[ai];
      const Alpha alpha(alpha_value);
      if (alpha.is_plugin() && is_density_procedure(name)) {
        continue;
      }
      for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const ParameterPoint& point = points[pi];
        const CanonicalParams params = point.params();
        RiskRow row;
        row.procedure = name;
        row.alpha = alpha_value;
        row.theta_norm = point.theta_norm;
        row.sigma2 = point.sigma2;
        if (alpha.is_plugin()) {
          const PluginProcedure procedure =
              plugin_procedure(name, problem, name == "shrinkage" ? need_prior() : PriorSpec{});
          const RiskEstimate est =
              risk_d1_mc(procedure, problem, params, reps, config.seed, config.threads);
          row.reps = est.reps;
          row.risk_mean = est.mean;
          row.risk_se = est.std_error;
          row.minimax_risk = minimax_risk(problem.d, problem.m, problem.n, problem.k);
          row.dominates = claim_allowed && row.minimax_risk - row.risk_mean > 3.0 * row.risk_se;
        } else {
          DensityBuilder builder;
          if (name == "best_invariant") {
            builder = [&problem, alpha](const CanonicalObservation& obs, std::uint64_t) {
              return best_invariant_density(problem, obs, alpha);
            };
          } else if (name == "generalized_bayes") {
            const PriorSpec spec = need_prior();
            const std::uint64_t seed = config.seed;
            builder = [&problem, spec, alpha, n_norm, seed](const CanonicalObservation& obs,
                                                            std::uint64_t r) {
              return shrinkage_bayes_density(problem, spec, obs, alpha, n_norm, seed, r);
            };
          } else {
            const PluginProcedure procedure =
                plugin_procedure(name, problem, name == "shrinkage" ? need_prior() : PriorSpec{});
            builder = [&problem, procedure](const CanonicalObservation& obs, std::uint64_t) {
              return plugin_density(procedure(obs), problem);
            };
          }
          auto cached = benchmark_losses.find({ai, pi});
          if (cached == benchmark_losses.end()) {
            const DensityBuilder benchmark = [&problem, alpha](const CanonicalObservation& obs,
                                                               std::uint64_t) {
              return best_invariant_density(problem, obs, alpha);
            };
            cached = benchmark_losses
                         .emplace(std::make_pair(ai, pi),
                                  alpha_losses(benchmark, problem, params, alpha, reps_outer,
                                               n_inner, config.seed, config.threads))
                         .first;
          }
          const std::vector<double>& base = cached->second;
          const std::vector<double> losses = alpha_losses(
              builder, problem, params, alpha, reps_outer, n_inner, config.seed, config.threads);
          const RiskEstimate est = summarize_with_exclusions(losses, config.seed);
          const RiskEstimate base_est = summarize(base, config.seed);
          std::vector<double> diff;
          for (std::size_t r = 0; r < losses.size(); ++r) {
            if (!std::isnan(losses[r])) {
              diff.push_back(losses[r] - base[r]);
            }
          }
          const RiskEstimate paired = summarize(diff, config.seed);
          row.reps = est.reps;
          row.risk_mean = est.mean;
          row.risk_se = est.std_error;
          row.minimax_risk = base_est.mean;
          row.dominates = claim_allowed && name != "best_invariant" && paired.reps >= 2 &&
                          paired.mean + 3.0 * paired.std_error < 0.0;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string risk_csv(const std::vector<RiskRow>& rows) {
  std::ostringstream out;
  out << "procedure,alpha,theta_norm,sigma2,reps,risk_mean,risk_se,minimax_risk,dominates_flag\n";
  for (const RiskRow& r : rows) {
    out << r.procedure << ',' << format_double(r.alpha) << ',' << format_double(r.theta_norm)
        << ',' << format_double(r.sigma2) << ',' << r.reps << ',' << format_double(r.risk_mean)
        << ',' << format_double(r.risk_se) << ',' << format_double(r.minimax_risk) << ','
        << format_flag(r.dominates) << '\n';
  }
  return out.str();
}

Json canonicalize_report(const ExperimentConfig& config, const CanonicalProblem& problem) {
  Json j = problem_to_json(problem, check_invariants(problem));
  const DesignInput design = build_design(config);
  if (design.y.size() > 0) {
    RegressionData data{design.X, design.y, design.Xtilde};
    j["observation"] = observation_to_json(to_canonical(problem, sufficient_statistics(data)));
  }
  return j;
}

Json bounds_report(const ExperimentConfig& config) {
  Vector d;
  Vector c;
  int m = 0;
  int n = 0;
  int k = 0;
  const Json& spec = block(config, "bounds");
  if (!spec.empty()) {
    d = vector_from_json(spec.at("D"), "bounds.D");
    c = spec.contains("C") ? vector_from_json(spec.at("C"), "bounds.C") : Vector::Ones(d.size());
    m = get_int(spec, "m");
    n = get_int(spec, "n");
    k = get_int(spec, "k");
  } else {
    const CanonicalProblem problem = build_problem(config);
    d = problem.d;
    const Json& prior = block(config, "prior");
    c = prior.contains("C") && !prior.at("C").is_string() ? vector_from_json(prior.at("C"), "C")
                                                          : Vector::Ones(d.size());
    m = problem.m;
    n = problem.n;
    k = problem.k;
  }
  const NuBounds b = nu_limits(d, c, m, n, k);
  Json j;
  j["nu1"] = b.nu1;
  j["nu2"] = finite_or_null(b.nu2);
  j["nu3"] = b.nu3;
  j["nu_max"] = b.nu_max;
  j["positive"] = b.positive;
  j["suggested_a"] = b.positive ? Json(a_of_nu(k, b.nu_max, n)) : Json(nullptr);
  j["rescale_g0"] = rescale_C_for_positivity(d, c, m, n, k);
  j["condition_d"] = condition_d(d, static_cast<int>(d.size()));
  j["warnings"] = b.warnings;
  return j;
}

IdentitySuiteConfig identity_config(const ExperimentConfig& config) {
  const Json& spec = block(config, "identities");
  IdentitySuiteConfig out;
  out.lemma_instances = count_field(spec, "lemma_instances", out.lemma_instances);
  out.quadratic_form_instances =
      count_field(spec, "quadratic_form_instances", out.quadratic_form_instances);
  out.beta_instances = count_field(spec, "beta_instances", out.beta_instances);
  out.chi_square_draws = count_field(spec, "chi_square_draws", out.chi_square_draws);
  out.log_grid_points = count_field(spec, "log_grid_points", out.log_grid_points);
  out.chi_square_dof = get_or<int>(spec, "chi_square_dof", out.chi_square_dof);
  out.chi_square_numerator_dof =
      get_or<int>(spec, "chi_square_numerator_dof", out.chi_square_numerator_dof);
  out.chi_square_nu = get_or<double>(spec, "chi_square_nu", out.chi_square_nu);
  out.chi_square_se_multiple =
      get_or<double>(spec, "chi_square_se_multiple", out.chi_square_se_multiple);
  if (spec.contains("tolerance")) {
    const double tol = spec.at("tolerance").get<double>();
    out.lemma_tolerance = tol;
    out.quadratic_form_tolerance = tol;
    out.beta_tolerance = tol;
  }
  out.lemma_tolerance = get_or<double>(spec, "lemma_tolerance", out.lemma_tolerance);
  out.quadratic_form_tolerance =
      get_or<double>(spec, "quadratic_form_tolerance", out.quadratic_form_tolerance);
  out.beta_tolerance = get_or<double>(spec, "beta_tolerance", out.beta_tolerance);
  out.log_tolerance = get_or<double>(spec, "log_tolerance", out.log_tolerance);
  return out;
}

Json identity_report_json(const IdentityReport& report) {
  Json items = Json::array();
  for (const IdentityOutcome& o : report.outcomes) {
    items.push_back({{"name", o.name},
                     {"instances", o.instances},
                     {"max_gap", finite_or_null(o.max_gap)},
                     {"tolerance", o.tolerance},
                     {"pass", o.pass}});
  }
  return {{"all_pass", report.all_pass()}, {"identities", std::move(items)}};
}

std::string density_eval(const ExperimentConfig& config, const CanonicalProblem& problem) {
  const Json& spec = block(config, "density");
  const Alpha alpha(get_or<double>(spec, "alpha", 0.0));
  CanonicalObservation obs;
  if (spec.contains("observation")) {
    obs = observation_from_json(spec.at("observation"));
  } else {
    const DesignInput design = build_design(config);
    if (design.y.size() == 0) {
      throw ConfigError("density: give an observation or a response vector y in the design");
    }
    obs = to_canonical(problem, sufficient_statistics({design.X, design.y, design.Xtilde}));
  }
  if (obs.V.size() != problem.l || obs.V_star.size() != problem.complement_dim()) {
    throw ConfigError("density.observation: V needs l entries and V_star k - l entries");
  }

  Matrix points;
  if (spec.contains("points_csv")) {
    points = read_matrix_csv(spec.at("points_csv").get<std::string>());
  } else if (spec.contains("points")) {
    points = matrix_from_json(spec.at("points"), "density.points");
  } else {
    throw ConfigError("density: give points or points_csv");
  }
  if (points.cols() != problem.m) {
    throw ConfigError("density: each point needs m coordinates");
  }

  const std::string method = get_or<std::string>(
      spec, "method", alpha.is_plugin() ? "plugin" : "generalized_bayes");
  PredictiveDensity density;
  if (method == "plugin") {
    if (!alpha.is_plugin()) {
      throw ConfigError("density: the plug-in method applies at alpha = 1");
    }
    density = plugin_density(plugin_bayes_estimators(problem, resolve_prior(config, problem).prior, obs),
                             problem);
  } else if (method == "best_invariant") {
    density = best_invariant_density(problem, obs, alpha);
  } else if (method == "generalized_bayes") {
    const std::size_t n_samples = count_field(spec, "n_samples", 20000);
    density = shrinkage_bayes_density(problem, resolve_prior(config, problem).prior, obs, alpha,
                                      n_samples, config.seed);
  } else {
    throw ConfigError("density: unknown method " + method);
  }

  std::ostringstream out;
  for (int j = 0; j < problem.m; ++j) {
    out << 'y' << (j + 1) << ',';
  }
  out << "log_density_unnormalized,log_norm_const,log_density\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector y = points.row(i).transpose();
    const double unnormalized = density.log_unnormalized(y);
    for (int j = 0; j < problem.m; ++j) {
      out << format_double(y(j)) << ',';
    }
    out << format_double(unnormalized) << ',' << format_double(density.log_norm_const) << ','
        << format_double(unnormalized - density.log_norm_const) << '\n';
  }
  return out.str();
}

}  // namespace bayespred
