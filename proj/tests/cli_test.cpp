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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bayespred_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& config, const std::string& name = "config.json") {
    const fs::path path = dir_ / name;
    std::ofstream(path) << config.dump(2);
    return path;
  }

  int run(const std::string& args) {
    const std::string command = std::string(BAYESPRED_CLI) + " " + args + " >" +
                                (dir_ / "stdout.txt").string() + " 2>" +
                                (dir_ / "stderr.txt").string();
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  int run_command(const std::string& sub, const fs::path& config, const fs::path& out,
                  const std::string& extra = "") {
    return run(sub + " --config " + config.string() + " --out " + out.string() + " " + extra);
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

json as1_config() {
  return {{"seed", 5}, {"design", {{"type", "as1"}, {"m", 3}, {"k", 3}, {"N", 4}}}};
}

TEST_F(CliTest, CanonicalizeReplicatedDesign) {
  const fs::path config = write_config(as1_config());
  ASSERT_EQ(run_command("canonicalize", config, dir_ / "out"), 0);
  const json problem = json::parse(slurp(dir_ / "out" / "problem.json"));
  for (const auto& d : problem["D"]) {
    EXPECT_NEAR(d.get<double>(), 0.25, 1e-14);
  }
  EXPECT_TRUE(problem["invariants"]["all_pass"].get<bool>());
  EXPECT_EQ(problem["case"], "I");
}

TEST_F(CliTest, CanonicalizeExplicitWithObservation) {
  json config = {{"design",
                  {{"type", "explicit"},
                   {"X", {{1, 0}, {0, 1}, {1, 1}, {2, -1}}},
                   {"Xtilde", {{1, 2}}},
                   {"y", {1.0, 2.0, 2.5, 0.3}}}}};
  ASSERT_EQ(run_command("canonicalize", write_config(config), dir_ / "out"), 0);
  const json problem = json::parse(slurp(dir_ / "out" / "problem.json"));
  EXPECT_EQ(problem["case"], "II");
  EXPECT_TRUE(problem["invariants"]["all_pass"].get<bool>());
  EXPECT_EQ(problem["observation"]["V"].size(), 1u);
  EXPECT_EQ(problem["observation"]["V_star"].size(), 1u);
}

TEST_F(CliTest, CanonicalizeFromCsvFiles) {
  std::ofstream(dir_ / "X.csv") << "1,0\n0,1\n1,1\n# comment\n2,-1\n";
  std::ofstream(dir_ / "Xt.csv") << "1,2\n3,1\n";
  json config = {{"design",
                  {{"type", "explicit"},
                   {"X", (dir_ / "X.csv").string()},
                   {"Xtilde", (dir_ / "Xt.csv").string()}}}};
  ASSERT_EQ(run_command("canonicalize", write_config(config), dir_ / "out"), 0);
  const json problem = json::parse(slurp(dir_ / "out" / "problem.json"));
  EXPECT_EQ(problem["n"], 4);
  EXPECT_EQ(problem["case"], "I");
}

TEST_F(CliTest, RankDeficientDesignExitsTwo) {
  json config = {{"design",
                  {{"type", "explicit"},
                   {"X", {{1, 2}, {2, 4}, {3, 6}, {4, 8}}},
                   {"Xtilde", {{1, 0}, {0, 1}}}}}};
  EXPECT_EQ(run_command("canonicalize", write_config(config), dir_ / "out"), 2);
}

TEST_F(CliTest, BoundsReport) {
  json config = as1_config();
  ASSERT_EQ(run_command("bounds", write_config(config), dir_ / "out"), 0);
  const json b = json::parse(slurp(dir_ / "out" / "bounds.json"));
  EXPECT_NEAR(b["nu1"].get<double>(), 0.2745098039215686, 1e-12);
  EXPECT_NEAR(b["nu3"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(b["positive"].get<bool>());
  EXPECT_NEAR(b["suggested_a"].get<double>(), 0.5 * (b["nu_max"].get<double>() * 9.0 - 5.0), 1e-12);
}

TEST_F(CliTest, BoundsFromExplicitInputs) {
  json config = {{"bounds", {{"D", {1.0}}, {"C", {1.0}}, {"m", 1}, {"n", 10}, {"k", 1}}}};
  ASSERT_EQ(run_command("bounds", write_config(config), dir_ / "out"), 0);
  const json b = json::parse(slurp(dir_ / "out" / "bounds.json"));
  EXPECT_NEAR(b["nu1"].get<double>(), -32.0 / 207.0, 1e-14);
  EXPECT_FALSE(b["positive"].get<bool>());
  EXPECT_TRUE(b["suggested_a"].is_null());
  EXPECT_GT(b["rescale_g0"].get<double>(), 1.0);
}

TEST_F(CliTest, IdentitiesPass) {
  json config = {{"seed", 3}, {"identities", {{"chi_square_draws", 20000}}}};
  EXPECT_EQ(run_command("identities", write_config(config), dir_ / "out"), 0);
  const json r = json::parse(slurp(dir_ / "out" / "identities.json"));
  EXPECT_TRUE(r["all_pass"].get<bool>());
  EXPECT_EQ(r["identities"].size(), 5u);
}

TEST_F(CliTest, IdentitiesTightToleranceExitsThree) {
  json config = {{"identities", {{"tolerance", 1e-14}, {"chi_square_draws", 1000}}}};
  EXPECT_EQ(run_command("identities", write_config(config), dir_ / "out"), 3);
}

TEST_F(CliTest, IdentitiesZeroInstances) {
  json config = {{"identities",
                  {{"lemma_instances", 0},
                   {"quadratic_form_instances", 0},
                   {"beta_instances", 0},
                   {"chi_square_draws", 0},
                   {"log_grid_points", 0}}}};
  EXPECT_EQ(run_command("identities", write_config(config), dir_ / "out"), 0);
  const json r = json::parse(slurp(dir_ / "out" / "identities.json"));
  EXPECT_TRUE(r["identities"].empty());
}

TEST_F(CliTest, EmptyGridGivesHeaderOnly) {
  json config = as1_config();
  config["grid"] = {{"theta_norms", json::array()}};
  ASSERT_EQ(run_command("risk-compare", write_config(config), dir_ / "out"), 0);
  EXPECT_EQ(slurp(dir_ / "out" / "risk.csv"),
            "procedure,alpha,theta_norm,sigma2,reps,risk_mean,risk_se,minimax_risk,"
            "dominates_flag\n");
}

TEST_F(CliTest, RiskCompareIsReproducible) {
  json config = as1_config();
  config["alphas"] = {1.0, 0.5};
  config["grid"] = {{"theta_norms", {0.0, 2.0}}, {"sigma2", {1.0}}};
  config["procedures"] = {"umvu", "shrinkage", "generalized_bayes"};
  config["reps"] = 500;
  config["reps_outer"] = 60;
  config["n_mc_inner"] = 200;
  config["n_norm_samples"] = 1000;
  const fs::path path = write_config(config);
  ASSERT_EQ(run_command("risk-compare", path, dir_ / "a", "--threads 1"), 0);
  ASSERT_EQ(run_command("risk-compare", path, dir_ / "b", "--threads 1"), 0);
  ASSERT_EQ(run_command("risk-compare", path, dir_ / "c", "--threads 4"), 0);
  const std::string a = slurp(dir_ / "a" / "risk.csv");
  EXPECT_EQ(a, slurp(dir_ / "b" / "risk.csv"));
  EXPECT_EQ(a, slurp(dir_ / "c" / "risk.csv"));
  ASSERT_EQ(run_command("risk-compare", path, dir_ / "d", "--seed 99"), 0);
  EXPECT_NE(a, slurp(dir_ / "d" / "risk.csv"));
  std::istringstream lines(a);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) {
    ++rows;
  }
  // umvu and shrinkage at both alphas, generalized_bayes at alpha 0.5 only; 3 points each.
  EXPECT_EQ(rows, (2 * 2 + 1) * 3);
}

TEST_F(CliTest, GuardBreachExitsFour) {
  json config = as1_config();
  config["alphas"] = {0.9};
  config["grid"] = {{"theta_norms", {0.0}}};
  config["procedures"] = {"generalized_bayes"};
  config["prior"] = {{"a", 200.0}, {"rescale", false}};
  config["reps_outer"] = 50;
  config["n_mc_inner"] = 100;
  config["n_norm_samples"] = 500;
  EXPECT_EQ(run_command("risk-compare", write_config(config), dir_ / "out"), 4);
}

TEST_F(CliTest, DensityEval) {
  json config = as1_config();
  config["density"] = {{"alpha", 0.0},
                       {"observation", {{"V", {1.0, 0.0, -1.0}}, {"S", 9.0}}},
                       {"points", {{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}}},
                       {"n_samples", 5000}};
  ASSERT_EQ(run_command("density-eval", write_config(config), dir_ / "out"), 0);
  std::istringstream csv(slurp(dir_ / "out" / "density.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "y1,y2,y3,log_density_unnormalized,log_norm_const,log_density");
  std::string row;
  int count = 0;
  while (std::getline(csv, row)) {
    std::vector<double> cells;
    std::istringstream fields(row);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      cells.push_back(std::stod(cell));
    }
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_NEAR(cells[5], cells[3] - cells[4], 1e-12 * (1.0 + std::abs(cells[5])));
    ++count;
  }
  EXPECT_EQ(count, 2);
}

TEST_F(CliTest, DensityEvalPluginFromCsvPoints) {
  std::ofstream(dir_ / "points.csv") << "0,0,0\n0.5,0.5,0.5\n";
  json config = as1_config();
  config["density"] = {{"alpha", 1.0},
                       {"observation", {{"V", {1.0, 0.0, -1.0}}, {"S", 9.0}}},
                       {"points_csv", (dir_ / "points.csv").string()}};
  EXPECT_EQ(run_command("density-eval", write_config(config), dir_ / "out"), 0);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("bounds"), 1);
  EXPECT_EQ(run("bounds --config " + (dir_ / "missing.json").string()), 1);
  std::ofstream(dir_ / "bad.json") << "{ not json";
  EXPECT_EQ(run("bounds --config " + (dir_ / "bad.json").string()), 1);
  EXPECT_EQ(run("bounds --config " + write_config(as1_config()).string() + " --threads 0"), 1);
  json bad = as1_config();
  bad["design"]["N"] = 0;
  EXPECT_EQ(run_command("canonicalize", write_config(bad), dir_ / "out"), 1);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
