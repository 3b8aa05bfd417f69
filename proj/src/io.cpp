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

#include "bayespred/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "bayespred/error.hpp"

namespace bayespred {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) {
          throw ConfigError("csv: trailing characters in cell '" + cell + "'");
        }
      } catch (const std::logic_error&) {
        throw ConfigError("csv: cannot parse '" + cell + "' as a number");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ConfigError("csv: no data rows");
  }
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(i, j) = rows[i][j];
    }
  }
  return out;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_matrix_csv(buffer.str());
}

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      row.push_back(a(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ConfigError(std::string(what) + ": expected a nonempty array of rows");
  }
  const std::size_t cols = j.front().size();
  Matrix out(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(std::string(what) + ": ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw ConfigError(std::string(what) + ": non-numeric entry");
      }
      out(r, c) = j[r][c].get<double>();
    }
  }
  return out;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw ConfigError(std::string(what) + ": expected an array");
  }
  Vector out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ConfigError(std::string(what) + ": non-numeric entry");
    }
    out(i) = j[i].get<double>();
  }
  return out;
}

DesignInput design_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("X") || !j.contains("Xtilde")) {
    throw ConfigError("design: expected keys X and Xtilde");
  }
  DesignInput out;
  out.X = matrix_from_json(j.at("X"), "X");
  out.Xtilde = matrix_from_json(j.at("Xtilde"), "Xtilde");
  if (j.contains("y")) {
    out.y = vector_from_json(j.at("y"), "y");
  }
  return out;
}

Json problem_to_json(const CanonicalProblem& problem, const InvariantReport& report) {
  Json j;
  j["n"] = problem.n;
  j["k"] = problem.k;
  j["m"] = problem.m;
  j["l"] = problem.l;
  j["case"] = problem.canonical_case == CanonicalCase::I ? "I" : "II";
  j["D"] = vector_to_json(problem.d);
  j["Q"] = matrix_to_json(problem.Q);
  if (problem.canonical_case == CanonicalCase::I) {
    j["M"] = matrix_to_json(problem.M);
  } else {
    j["P"] = matrix_to_json(problem.P);
    j["P_star"] = matrix_to_json(problem.P_star);
    j["Xtilde_star"] = matrix_to_json(problem.Xtilde_star);
  }
  j["X"] = matrix_to_json(problem.X);
  j["Xtilde"] = matrix_to_json(problem.Xtilde);
  j["xtx_condition"] = problem.xtx_condition;
  j["warnings"] = problem.warnings;
  Json checks = Json::array();
  for (const InvariantCheck& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
  }
  j["invariants"] = {{"all_pass", report.all_pass()}, {"checks", std::move(checks)}};
  return j;
}

CanonicalProblem problem_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("X") || !j.contains("Xtilde")) {
    throw ConfigError("problem: expected the source matrices X and Xtilde");
  }
  return canonicalize(matrix_from_json(j.at("X"), "X"), matrix_from_json(j.at("Xtilde"), "Xtilde"));
}

Json observation_to_json(const CanonicalObservation& obs) {
  return {{"V", vector_to_json(obs.V)}, {"V_star", vector_to_json(obs.V_star)}, {"S", obs.S}};
}

CanonicalObservation observation_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("V") || !j.contains("S")) {
    throw ConfigError("observation: expected keys V and S");
  }
  CanonicalObservation obs;
  obs.V = vector_from_json(j.at("V"), "V");
  obs.V_star = j.contains("V_star") ? vector_from_json(j.at("V_star"), "V_star") : Vector(0);
  if (!j.at("S").is_number()) {
    throw ConfigError("observation: S must be a number");
  }
  obs.S = j.at("S").get<double>();
  return obs;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << text;
}

}  // namespace bayespred
