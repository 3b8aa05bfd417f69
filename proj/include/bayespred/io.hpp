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

#ifndef BAYESPRED_IO_HPP
#define BAYESPRED_IO_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bayespred/canonical.hpp"

namespace bayespred {

using Json = nlohmann::json;

/// Decimal rendering with 17 significant digits.
std::string format_double(double value);

/// Dense row-major CSV; blank lines and lines starting with '#' are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text);

Json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const Json& j, const char* what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const char* what);

/// {"X": [[...]], "Xtilde": [[...]], "y": [...]}; y may be absent.
struct DesignInput {
  Matrix X;
  Matrix Xtilde;
  Vector y;
};

DesignInput design_from_json(const Json& j);

Json problem_to_json(const CanonicalProblem& problem, const InvariantReport& report);
CanonicalProblem problem_from_json(const Json& j);

Json observation_to_json(const CanonicalObservation& obs);
CanonicalObservation observation_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bayespred

#endif
