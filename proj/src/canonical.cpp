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

#include "bayespred/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bayespred/error.hpp"
#include "bayespred/rng.hpp"

namespace bayespred {

namespace {

struct SortedEigen {
  Vector values;
  Matrix vectors;
};

// Tie groups closer than this (relative to the largest eigenvalue) share one eigenspace.
constexpr double kTieTolerance = 1e-10;

void canonical_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double scale = vectors.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > 1e-12 * scale) {
        if (vectors(i, j) < 0.0) {
          vectors.col(j) = -vectors.col(j);
        }
        break;
      }
    }
  }
}

// Replaces the basis of a degenerate eigenspace by the Gram-Schmidt orthonormalization of
// the projected unit vectors e_1, e_2, ... so the result does not depend on the solver.
Matrix canonical_eigenspace_basis(const Matrix& subspace) {
  const Eigen::Index n = subspace.rows();
  const Eigen::Index r = subspace.cols();
  Matrix basis(n, r);
  Eigen::Index found = 0;
  for (Eigen::Index j = 0; j < n && found < r; ++j) {
    Vector w = subspace * subspace.row(j).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < found; ++i) {
        w -= basis.col(i).dot(w) * basis.col(i);
      }
    }
    if (w.norm() > 1e-6) {
      basis.col(found++) = w.normalized();
    }
  }
  return found == r ? basis : subspace;
}

// Symmetric eigendecomposition, eigenvalues nonincreasing (stable on ties).
SortedEigen sorted_symmetric_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
  if (solver.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed");
  }
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Vector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return raw(x) > raw(y); });
  SortedEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = raw(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  const double tolerance = kTieTolerance * std::max(out.values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && out.values(start) - out.values(end) <= tolerance) {
      ++end;
    }
    if (end - start > 1) {
      const Eigen::Index r = end - start;
      out.vectors.middleCols(start, r) = canonical_eigenspace_basis(out.vectors.middleCols(start, r));
      out.values.segment(start, r).setConstant(out.values.segment(start, r).mean());
    }
    start = end;
  }
  canonical_signs(out.vectors);
  return out;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

// Squared singular values of R^{-T} Xtilde' with X = QR, which avoids squaring the condition
// number of X. Averaged over the tie groups already chosen by the eigen solve.
Vector refined_spectrum(const Matrix& X, const Matrix& Xtilde, const Vector& grouped) {
  Eigen::HouseholderQR<Matrix> qr(X);
  const Eigen::Index k = X.cols();
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Matrix w = r.transpose().triangularView<Eigen::Lower>().solve(Xtilde.transpose());
  Eigen::JacobiSVD<Matrix> svd(w);
  Vector values = svd.singularValues().head(grouped.size()).array().square();
  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index end = start + 1;
    while (end < values.size() && grouped(end) == grouped(start)) {
      ++end;
    }
    values.segment(start, end - start).setConstant(values.segment(start, end - start).mean());
    start = end;
  }
  return values;
}

}  // namespace

void RegressionData::validate() const {
  if (X.cols() < 1 || X.rows() <= X.cols()) {
    throw DimensionError("regression data: need n > k >= 1");
  }
  if (y.size() != X.rows()) {
    throw DimensionError("regression data: y must have n entries");
  }
  if (Xtilde.cols() != X.cols() || Xtilde.rows() < 1) {
    throw DimensionError("regression data: Xtilde must be m x k with m >= 1");
  }
  if (!all_finite(X) || !y.allFinite() || !all_finite(Xtilde)) {
    throw DomainError("regression data: entries must be finite");
  }
}

SufficientStats sufficient_statistics(const RegressionData& data) {
  data.validate();
  const Matrix xtx = data.X.transpose() * data.X;
  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(xtx, Eigen::EigenvaluesOnly);
  const double smallest = spectrum.eigenvalues().minCoeff();
  const double largest = spectrum.eigenvalues().maxCoeff();
  if (!(smallest > 0.0) || largest / smallest > kRankDeficiencyLimit) {
    throw RankDeficiencyError("X'X is numerically singular");
  }
  Eigen::LLT<Matrix> llt(xtx);
  SufficientStats stats;
  stats.beta_hat = llt.solve(data.X.transpose() * data.y);
  stats.S = (data.y - data.X * stats.beta_hat).squaredNorm();
  return stats;
}

CanonicalProblem canonicalize(const Matrix& X, const Matrix& Xtilde) {
  const auto n = static_cast<int>(X.rows());
  const auto k = static_cast<int>(X.cols());
  const auto m = static_cast<int>(Xtilde.rows());
  if (k < 1 || n <= k) {
    throw DimensionError("canonicalize: need n > k >= 1");
  }
  if (Xtilde.cols() != k || m < 1) {
    throw DimensionError("canonicalize: Xtilde must be m x k with m >= 1");
  }
  if (!all_finite(X) || !all_finite(Xtilde)) {
    throw DomainError("canonicalize: entries must be finite");
  }

  CanonicalProblem problem;
  problem.n = n;
  problem.k = k;
  problem.m = m;
  problem.l = std::min(k, m);
  problem.X = X;
  problem.Xtilde = Xtilde;

  const Matrix xtx = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(xtx, Eigen::EigenvaluesOnly);
  const double smallest = spectrum.eigenvalues().minCoeff();
  const double largest = spectrum.eigenvalues().maxCoeff();
  if (!(smallest > 0.0) || largest / smallest > kRankDeficiencyLimit) {
    throw RankDeficiencyError("canonicalize: X is rank deficient");
  }
  problem.xtx_condition = largest / smallest;
  if (problem.xtx_condition > kConditioningWarning) {
    problem.warnings.push_back("X'X is ill-conditioned (condition number " +
                               std::to_string(problem.xtx_condition) + ")");
  }
  Eigen::LLT<Matrix> llt(xtx);
  problem.xtx_inverse = llt.solve(Matrix::Identity(k, k));
  problem.xtx_inverse = 0.5 * (problem.xtx_inverse + problem.xtx_inverse.transpose()).eval();
  const Matrix lower = llt.matrixL();

  Eigen::JacobiSVD<Matrix> svd(Xtilde, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& singular = svd.singularValues();
  if (!(singular(singular.size() - 1) > 1e-12 * singular(0))) {
    throw RankDeficiencyError("canonicalize: Xtilde does not have rank min(m, k)");
  }

  if (m >= k) {
    problem.canonical_case = CanonicalCase::I;
    // Symmetric square root R of Xtilde'Xtilde; G = R (X'X)^{-1} R = U Delta U', M = R U.
    const Matrix& basis = svd.matrixV();
    const Matrix r = basis * singular.asDiagonal() * basis.transpose();
    const Matrix z = lower.triangularView<Eigen::Lower>().solve(r);
    const SortedEigen eig = sorted_symmetric_eigen(z.transpose() * z);
    problem.d = refined_spectrum(X, Xtilde, eig.values);
    problem.M = r * eig.vectors;
    problem.Q = svd.matrixU() * (basis.transpose() * eig.vectors);
  } else {
    problem.canonical_case = CanonicalCase::II;
    const Matrix z = lower.triangularView<Eigen::Lower>().solve(Xtilde.transpose());
    const SortedEigen eig = sorted_symmetric_eigen(z.transpose() * z);
    problem.d = refined_spectrum(X, Xtilde, eig.values);
    problem.P = eig.vectors;
    problem.Q = eig.vectors;

    // Rows of Xtilde* span the null space of Xtilde (X'X)^{-1}.
    const Matrix b_transposed = llt.solve(Xtilde.transpose());
    Eigen::HouseholderQR<Matrix> qr(b_transposed);
    const Matrix full_q = qr.householderQ() * Matrix::Identity(k, k);
    problem.Xtilde_star = full_q.rightCols(k - m).transpose();
    const Matrix h = problem.Xtilde_star * problem.xtx_inverse * problem.Xtilde_star.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> whiten(0.5 * (h + h.transpose()));
    problem.P_star = whiten.eigenvectors() *
                     whiten.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                     whiten.eigenvectors().transpose();
  }
  if (!(problem.d.minCoeff() > 0.0)) {
    throw RankDeficiencyError("canonicalize: nonpositive canonical variance");
  }
  return problem;
}

CanonicalObservation to_canonical(const CanonicalProblem& problem, const SufficientStats& stats) {
  if (stats.beta_hat.size() != problem.k) {
    throw DimensionError("to_canonical: beta_hat must have k entries");
  }
  if (!(stats.S >= 0.0)) {
    throw DomainError("to_canonical: S must be nonnegative");
  }
  CanonicalObservation obs;
  obs.S = stats.S;
  if (problem.canonical_case == CanonicalCase::I) {
    obs.V = problem.M.transpose() * stats.beta_hat;
    obs.V_star = Vector(0);
  } else {
    obs.V = problem.P.transpose() * (problem.Xtilde * stats.beta_hat);
    obs.V_star = problem.P_star.transpose() * (problem.Xtilde_star * stats.beta_hat);
  }
  return obs;
}

CanonicalParams params_to_canonical(const CanonicalProblem& problem, const Vector& beta,
                                    double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw DomainError("params_to_canonical: sigma2 must be positive");
  }
  if (beta.size() != problem.k) {
    throw DimensionError("params_to_canonical: beta must have k entries");
  }
  CanonicalParams params;
  params.eta = 1.0 / sigma2;
  if (problem.canonical_case == CanonicalCase::I) {
    params.theta = problem.M.transpose() * beta;
    params.mu = Vector(0);
  } else {
    params.theta = problem.P.transpose() * (problem.Xtilde * beta);
    params.mu = problem.P_star.transpose() * (problem.Xtilde_star * beta);
  }
  return params;
}

CanonicalObservation simulate_observation(const CanonicalProblem& problem,
                                          const CanonicalParams& params, std::uint64_t seed,
                                          std::uint64_t replication) {
  if (params.theta.size() != problem.l || params.mu.size() != problem.complement_dim()) {
    throw DimensionError("simulate_observation: parameter dimensions do not match problem");
  }
  if (!(params.eta > 0.0)) {
    throw DomainError("simulate_observation: eta must be positive");
  }
  CounterRng rng(seed, replication, Stream::kObservation);
  const double scale = 1.0 / std::sqrt(params.eta);
  CanonicalObservation obs;
  obs.V.resize(problem.l);
  for (int i = 0; i < problem.l; ++i) {
    obs.V(i) = params.theta(i) + std::sqrt(problem.d(i)) * scale * rng.normal();
  }
  obs.V_star.resize(problem.complement_dim());
  for (int i = 0; i < problem.complement_dim(); ++i) {
    obs.V_star(i) = params.mu(i) + scale * rng.normal();
  }
  obs.S = rng.chi_square(problem.residual_dof()) / params.eta;
  return obs;
}

bool InvariantReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass(); });
}

namespace {

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double max_off_diagonal(const Matrix& a) {
  Matrix off = a;
  off.diagonal().setZero();
  return max_abs(off);
}

}  // namespace

InvariantReport check_invariants(const CanonicalProblem& problem) {
  InvariantReport report;
  const Matrix identity_l = Matrix::Identity(problem.l, problem.l);
  report.checks.push_back({"Q'Q = I", max_abs(problem.Q.transpose() * problem.Q - identity_l), 1e-10});

  double increase = 0.0;
  for (Eigen::Index i = 1; i < problem.d.size(); ++i) {
    increase = std::max(increase, problem.d(i) - problem.d(i - 1));
  }
  report.checks.push_back({"D nonincreasing", increase, 0.0});
  report.checks.push_back({"D positive", problem.d.minCoeff() > 0.0 ? 0.0 : 1.0, 0.0});

  if (problem.canonical_case == CanonicalCase::I) {
    const Matrix gram = problem.Xtilde.transpose() * problem.Xtilde;
    report.checks.push_back({"MM' = Xtilde'Xtilde (relative)",
                             (problem.M * problem.M.transpose() - gram).norm() / gram.norm(), 1e-8});
    const Matrix reduced = problem.M.transpose() * problem.xtx_inverse * problem.M;
    const double scale = max_abs(reduced.diagonal());
    report.checks.push_back({"M'(X'X)^-1 M off-diagonal (relative)", max_off_diagonal(reduced) / scale, 1e-8});
    report.checks.push_back({"M'(X'X)^-1 M diagonal = D (relative)",
                             max_abs(reduced.diagonal() - problem.d) / scale, 1e-8});
  } else {
    const int m = problem.m;
    report.checks.push_back({"P'P = I", max_abs(problem.P.transpose() * problem.P - Matrix::Identity(m, m)), 1e-10});
    const Matrix reduced =
        problem.P.transpose() * problem.Xtilde * problem.xtx_inverse * problem.Xtilde.transpose() * problem.P;
    const double scale = max_abs(reduced.diagonal());
    report.checks.push_back({"P'Xtilde(X'X)^-1Xtilde'P off-diagonal (relative)", max_off_diagonal(reduced) / scale, 1e-8});
    report.checks.push_back({"P'Xtilde(X'X)^-1Xtilde'P diagonal = D (relative)",
                             max_abs(reduced.diagonal() - problem.d) / scale, 1e-8});
    report.checks.push_back({"Xtilde(X'X)^-1Xtilde*' = 0",
                             max_abs(problem.Xtilde * problem.xtx_inverse * problem.Xtilde_star.transpose()), 1e-8});
    const int r = problem.complement_dim();
    report.checks.push_back(
        {"P*'Xtilde*(X'X)^-1Xtilde*'P* = I",
         max_abs(problem.P_star.transpose() * problem.Xtilde_star * problem.xtx_inverse *
                     problem.Xtilde_star.transpose() * problem.P_star -
                 Matrix::Identity(r, r)),
         1e-8});
    Matrix stacked(problem.k, problem.k);
    stacked << problem.Xtilde, problem.Xtilde_star;
    Eigen::JacobiSVD<Matrix> svd(stacked);
    const Vector& s = svd.singularValues();
    report.checks.push_back({"(Xtilde; Xtilde*) nonsingular (inverse condition)",
                             s(s.size() - 1) > 0.0 ? 0.0 : 1.0, 0.0});
  }
  return report;
}

Matrix replicated_design(const Matrix& Xtilde, int replicates) {
  if (replicates < 1) {
    throw DomainError("replicated_design: need at least one replicate");
  }
  Matrix X(Xtilde.rows() * replicates, Xtilde.cols());
  for (int r = 0; r < replicates; ++r) {
    X.middleRows(r * Xtilde.rows(), Xtilde.rows()) = Xtilde;
  }
  return X;
}

}  // namespace bayespred
