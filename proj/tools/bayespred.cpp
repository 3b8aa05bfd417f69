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

// Command-line front end: canonicalize, bounds, identities, risk-compare, density-eval.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bayespred/error.hpp"
#include "bayespred/experiment.hpp"
#include "bayespred/io.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kCanonicalization = 2,
  kIdentity = 3,
  kGuard = 4,
};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

bayespred::CanonicalProblem problem_or_exit(const bayespred::ExperimentConfig& config, int& code) {
  try {
    return bayespred::build_problem(config);
  } catch (const bayespred::ConfigError&) {
    throw;
  } catch (const bayespred::Error& e) {
    std::cerr << "canonicalization failed: " << e.what() << '\n';
    code = kCanonicalization;
    return {};
  }
}

int run(const std::string& command, const Options& options) {
  using namespace bayespred;
  const ExperimentConfig config =
      load_config(read_json_file(options.config_path), options.seed, options.threads);
  const std::filesystem::path out(options.out_dir);

  if (command == "bounds") {
    const Json report = bounds_report(config);
    write_text_file(out / "bounds.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << '\n';
    return kOk;
  }
  if (command == "identities") {
    const IdentityReport report = run_identity_suite(identity_config(config), config.seed);
    const Json j = identity_report_json(report);
    write_text_file(out / "identities.json", j.dump(2) + "\n");
    for (const IdentityOutcome& o : report.outcomes) {
      std::cout << (o.pass ? "PASS " : "FAIL ") << o.name << " instances=" << o.instances
                << " max_gap=" << format_double(o.max_gap)
                << " tolerance=" << format_double(o.tolerance) << '\n';
    }
    return report.all_pass() ? kOk : kIdentity;
  }

  int code = kOk;
  const CanonicalProblem problem = problem_or_exit(config, code);
  if (code != kOk) {
    return code;
  }
  if (command == "canonicalize") {
    const Json report = canonicalize_report(config, problem);
    write_text_file(out / "problem.json", report.dump(2) + "\n");
    for (const std::string& w : problem.warnings) {
      std::cerr << "warning: " << w << '\n';
    }
    if (!report["invariants"]["all_pass"].get<bool>()) {
      std::cerr << "canonical invariants failed; see problem.json\n";
      return kCanonicalization;
    }
    return kOk;
  }
  if (command == "risk-compare") {
    try {
      write_text_file(out / "risk.csv", risk_csv(run_risk_compare(config, problem)));
    } catch (const MonteCarloGuardError& e) {
      std::cerr << "monte carlo guard: " << e.what() << '\n';
      return kGuard;
    }
    return kOk;
  }
  if (command == "density-eval") {
    try {
      write_text_file(out / "density.csv", density_eval(config, problem));
    } catch (const NormalizationError& e) {
      std::cerr << "normalization: " << e.what() << '\n';
      return kGuard;
    }
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Bayes predictive densities for normal linear regression"};
  app.require_subcommand(1);
  Options options;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  for (const char* name : {"canonicalize", "bounds", "identities", "risk-compare", "density-eval"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "experiment JSON")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", options.out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) {
    options.seed = seed;
  }
  if (chosen->count("--threads") > 0) {
    options.threads = threads;
  }

  try {
    return run(chosen->get_name(), options);
  } catch (const bayespred::MonteCarloGuardError& e) {
    std::cerr << "monte carlo guard: " << e.what() << '\n';
    return kGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
