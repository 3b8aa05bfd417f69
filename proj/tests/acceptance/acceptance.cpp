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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <sys/wait.h>

#include "../test_support.hpp"
#include "bayespred/bounds.hpp"
#include "bayespred/canonical.hpp"
#include "bayespred/identities.hpp"
#include "bayespred/io.hpp"
#include "bayespred/predictive.hpp"
#include "bayespred/risk.hpp"

namespace {

using namespace bayespred;
using bayespred::testing::random_matrix;
using bayespred::testing::random_vector;

constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

CanonicalParams make_params(const Vector& theta, const Vector& mu, double sigma2) {
  CanonicalParams p;
  p.theta = theta;
  p.mu = mu;
  p.eta = 1.0 / sigma2;
  return p;
}

CanonicalProblem as1() {
  const Matrix xtilde = random_matrix(kSeed, 0, 3, 3);
  return canonicalize(replicated_design(xtilde, 4), xtilde);
}

CanonicalProblem case_two() {
  return canonicalize(random_matrix(kSeed, 1, 12, 3), random_matrix(kSeed, 2, 1, 3));
}

RiskEstimate paired(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
  }
  return summarize(diff, kSeed);
}

PriorSpec nu_max_prior(const CanonicalProblem& p) {
  const Vector c0 = Vector::Ones(p.l);
  const double g0 = rescale_C_for_positivity(p.d, c0, p.m, p.n, p.k);
  const Vector c = g0 * c0;
  const NuBounds b = nu_limits(p.d, c, p.m, p.n, p.k);
  PriorSpec prior;
  prior.c = c;
  prior.a = a_of_nu(p.k, b.nu_max, p.n);
  prior.gamma = 1.0;
  return prior;
}

void umvu_constancy(Outcome& out) {
  const CanonicalProblem p = as1();
  const double gamma = 4.5;
  const double oracle =
      0.5 * (p.d.sum() + 3.0 * (std::log(gamma) - boost::math::digamma(gamma)));
  const double mm = minimax_risk(p.d, p.m, p.n, p.k);
  out.detail << "minimax " << mm << " oracle " << oracle;
  out.require(std::abs(mm - oracle) < 1e-12, "minimax formula");
  const Vector e1 = Vector::Unit(3, 0);
  const Vector ones = Vector::Ones(3).normalized();
  const std::vector<CanonicalParams> points = {
      make_params(Vector::Zero(3), Vector(0), 1.0), make_params(5.0 * e1, Vector(0), 1.0),
      make_params(5.0 * ones, Vector(0), 1.0), make_params(Vector::Zero(3), Vector(0), 0.5),
      make_params(Vector::Zero(3), Vector(0), 4.0)};
  const PluginProcedure umvu = [&](const CanonicalObservation& o) { return umvu_estimators(p, o); };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RiskEstimate r = risk_d1_mc(umvu, p, points[i], 20000, kSeed + i);
    out.detail << "; pt" << i << " " << r.mean << "+-" << r.std_error;
    out.require(std::abs(r.mean - mm) <= 3.0 * r.std_error, "point " + std::to_string(i));
  }
}

void shrinkage_domination(Outcome& out) {
  const CanonicalProblem p = as1();
  const PriorSpec prior = nu_max_prior(p);
  const double mm = minimax_risk(p.d, p.m, p.n, p.k);
  const PluginProcedure proc = [&](const CanonicalObservation& o) {
    return plugin_bayes_estimators(p, prior, o);
  };
  out.detail << "nu " << prior.nu(p.n, p.k) << " minimax " << mm;
  const std::vector<double> norms = {0.0, 2.0, 5.0, 10.0};
  std::vector<RiskEstimate> risks;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const CanonicalParams params = make_params(norms[i] * Vector::Unit(3, 0), Vector(0), 1.0);
    risks.push_back(risk_d1_mc(proc, p, params, 20000, kSeed + 10 + i));
    out.detail << "; |theta|=" << norms[i] << " " << risks.back().mean << "+-"
               << risks.back().std_error;
  }
  out.require(risks[0].mean < mm - 3.0 * risks[0].std_error, "theta = 0 below minimax");
  for (std::size_t i = 1; i < risks.size(); ++i) {
    out.require(risks[i].mean <= mm + 3.0 * risks[i].std_error, "bounded by minimax");
    const double se = std::hypot(risks[i].std_error, risks[i - 1].std_error);
    out.require(risks[i - 1].mean <= risks[i].mean + 3.0 * se, "monotone");
  }
  out.require(std::abs(risks.back().mean - mm) < std::abs(risks.front().mean - mm),
              "approaches minimax");
}

void small_l_domination(Outcome& out) {
  const CanonicalProblem p = case_two();
  const PriorSpec prior = nu_max_prior(p);
  out.detail << "l " << p.l << " c " << prior.c(0) << " nu " << prior.nu(p.n, p.k);
  out.require(p.canonical_case == CanonicalCase::II && p.l == 1, "case II with l = 1");
  const CanonicalParams params = make_params(Vector::Zero(1), Vector::Zero(2), 1.0);
  const PluginProcedure proc = [&](const CanonicalObservation& o) {
    return plugin_bayes_estimators(p, prior, o);
  };
  const PluginProcedure umvu = [&](const CanonicalObservation& o) { return umvu_estimators(p, o); };
  const std::vector<double> a = d1_losses(proc, p, params, 20000, kSeed + 20);
  const std::vector<double> b = d1_losses(umvu, p, params, 20000, kSeed + 20);
  const RiskEstimate diff = paired(a, b);
  out.detail << "; risk difference " << diff.mean << "+-" << diff.std_error;
  out.require(diff.mean < -3.0 * diff.std_error, "dominates at theta = 0");
}

void stein_dominance(Outcome& out) {
  const auto run = [&](const CanonicalProblem& p, bool star, std::uint64_t seed) {
    const CanonicalParams params =
        make_params(Vector::Zero(p.l), Vector::Zero(p.k - p.l), 1.0);
    constexpr std::size_t reps = 50000;
    std::vector<double> stein(reps);
    std::vector<double> unbiased(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const CanonicalObservation obs = simulate_observation(p, params, seed, r);
      const double s2 = star ? stein_variance_star(obs, p.n, p.k)
                             : stein_variance(obs, p.d, p.n, p.k);
      stein[r] = stein_loss(s2, 1.0);
      unbiased[r] = stein_loss(obs.S / (p.n - p.k), 1.0);
    }
    return paired(stein, unbiased);
  };
  const RiskEstimate plain = run(as1(), false, kSeed + 30);
  const RiskEstimate star = run(case_two(), true, kSeed + 31);
  out.detail << "stein " << plain.mean << "+-" << plain.std_error << "; stein* " << star.mean
             << "+-" << star.std_error;
  out.require(plain.mean < -3.0 * plain.std_error, "stein");
  out.require(star.mean < -3.0 * star.std_error, "stein*");
}

void identity_suite(Outcome& out) {
  const IdentityReport report = run_identity_suite(IdentitySuiteConfig{}, kSeed);
  for (const IdentityOutcome& o : report.outcomes) {
    out.detail << o.name << " " << o.max_gap << "/" << o.tolerance << (o.pass ? " ok; " : " FAIL; ");
  }
  out.require(report.all_pass(), "suite");
}

void d1_equivalence(Outcome& out) {
  const std::vector<CanonicalProblem> problems = {as1(), case_two()};
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const CanonicalProblem& p = problems[i % 2];
    CounterRng rng(kSeed, 100 + i, Stream::kDesign);
    PluginEstimate est;
    est.theta_hat = random_vector(kSeed, 200 + i, p.l);
    est.sigma2_hat = std::exp(0.5 * rng.normal());
    const Vector theta = random_vector(kSeed, 300 + i, p.l);
    const double sigma2 = std::exp(0.5 * rng.normal());
    const PredictiveDensity phat = plugin_density(est, p);
    const RiskEstimate mc =
        alpha_divergence_mc(phat, theta, 1.0 / sigma2, p, Alpha(1.0), 50000, kSeed + 40, i);
    const double exact = d1_loss_plugin(est.theta_hat, est.sigma2_hat, theta, sigma2, p.m);
    const double z = std::abs(mc.mean - exact) / mc.std_error;
    worst = std::max(worst, z);
    if (z > 3.0) {
      ++failures;
    }
  }
  out.detail << "worst |gap|/SE " << worst;
  out.require(failures == 0, std::to_string(failures) + " instances outside 3 SE");
}

void alpha_limit(Outcome& out) {
  const CanonicalProblem p = as1();
  const PriorSpec prior = PriorSpec::identity(3, 0.0);
  CanonicalObservation obs;
  obs.V = (Vector(3) << 1.0, -0.5, 0.8).finished();
  obs.V_star = Vector(0);
  obs.S = 9.0;
  const PluginEstimate plug = plugin_bayes_estimators(p, prior, obs);
  const std::vector<Vector> points = {p.Q * plug.theta_hat, Vector::Zero(3),
                                      (Vector(3) << 1.0, 1.0, 1.0).finished(),
                                      (Vector(3) << -1.0, 0.5, 2.0).finished(),
                                      p.Q * plug.theta_hat + Vector::Constant(3, 0.5)};
  const AlphaLimitTable table =
      alpha_limit_check(p, prior, obs, points, {0.9, 0.99, 0.999}, 400000, kSeed + 50);
  for (Eigen::Index j = 0; j < table.gaps.cols(); ++j) {
    out.detail << "pt" << j << " " << table.gaps(0, j) << " > " << table.gaps(1, j) << " > "
               << table.gaps(2, j) << "; ";
  }
  out.require(table.decreasing(), "decreasing gaps");
}

void canonicalization(Outcome& out) {
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const bool case_one = i % 2 == 0;
    const int k = 1 + i % 5;
    const int m = case_one ? k + (i / 2) % 3 : std::max(1, k - 1 - (i / 2) % 2);
    const int n = k + 2 + i % 7;
    if (!case_one && m >= k) {
      continue;
    }
    const CanonicalProblem p =
        canonicalize(random_matrix(kSeed, 400 + i, n, k), random_matrix(kSeed, 600 + i, m, k));
    if (!check_invariants(p).all_pass() ||
        (p.canonical_case == CanonicalCase::I) != case_one) {
      ++failures;
    }
  }
  out.detail << failures << " invariant failures";
  out.require(failures == 0, "random designs");
  double worst = 0.0;
  for (const auto& [m, N] : {std::pair{3, 4}, std::pair{5, 2}, std::pair{4, 7}}) {
    const Matrix xtilde = random_matrix(kSeed, 800 + m, m, 3);
    const CanonicalProblem p = canonicalize(replicated_design(xtilde, N), xtilde);
    worst = std::max(worst, (p.d.array() * N - 1.0).abs().maxCoeff());
  }
  out.detail << "; replicated design max |N d - 1| " << worst;
  out.require(worst <= 1e-13, "replicated design");
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(BAYESPRED_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Outcome& out) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bayespred_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Json config = {
      {"seed", 42},
      {"design", {{"type", "as1"}, {"m", 3}, {"k", 3}, {"N", 4}}},
      {"alphas", {1.0, 0.0}},
      {"grid", {{"theta_norms", {0.0, 3.0}}, {"sigma2", {1.0}}}},
      {"reps", 5000},
      {"reps_outer", 100},
      {"n_mc_inner", 300},
      {"n_norm_samples", 2000}};
  std::ofstream(dir / "config.json") << config.dump(2);
  const std::string base = "risk-compare --config " + (dir / "config.json").string() + " --out ";
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"a", "1"}, {"b", "1"}, {"c", "8"}, {"d", "8"}};
  std::vector<std::string> outputs;
  for (const auto& [name, threads] : runs) {
    const int code = run_cli(base + (dir / name).string() + " --threads " + threads);
    out.require(code == 0, "exit code " + std::to_string(code));
    outputs.push_back(slurp(dir / name / "risk.csv"));
  }
  out.require(!outputs[0].empty(), "nonempty output");
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    out.require(outputs[i] == outputs[0], "run " + runs[i].first + " differs");
  }
  out.detail << outputs[0].size() << " bytes per run";
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"minimax risk constancy", umvu_constancy},
      {"shrinkage domination at nu_max", shrinkage_domination},
      {"small-l domination in case II", small_l_domination},
      {"Stein variance dominance", stein_dominance},
      {"identity suite", identity_suite},
      {"D1 equivalence of plug-in divergence", d1_equivalence},
      {"alpha to 1 convergence", alpha_limit},
      {"canonicalization", canonicalization},
      {"risk-compare determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s) %.1fs: %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), secs, out.detail.str().c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
