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

#include "bayespred/bounds.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "bayespred/error.hpp"
#include "bayespred/rng.hpp"

namespace bayespred {
namespace {

TEST(NuLimits, IdentityExample) {
  const NuBounds b = nu_limits(Vector::Ones(3), Vector::Ones(3), 3, 12, 3);
  EXPECT_NEAR(b.nu1, 16.0 / 75.0, 1e-15);
  EXPECT_NEAR(b.nu2, 13.0 / 15.0, 1e-15);
  EXPECT_NEAR(b.nu3, 4.0, 1e-15);
  EXPECT_NEAR(b.nu_max, 16.0 / 75.0, 1e-15);
  EXPECT_TRUE(b.positive);
  EXPECT_TRUE(b.warnings.empty());
}

TEST(NuLimits, ReplicatedDesignExample) {
  const NuBounds b = nu_limits(Vector::Constant(3, 0.25), Vector::Ones(3), 3, 12, 3);
  EXPECT_NEAR(b.nu1, 4.0 * (0.25 + 1.0 / 3.0) / (0.5 * 11.0 + 3.0), 1e-15);
  EXPECT_NEAR(b.nu2, (4.0 * 0.5 + 2.0 / 3.0) / (7.0 * 0.25 + 3.0), 1e-15);
  EXPECT_NEAR(b.nu3, 1.0, 1e-15);
}

TEST(NuLimits, SingleComponentIsNegative) {
  const NuBounds b = nu_limits(Vector::Ones(1), Vector::Ones(1), 1, 10, 1);
  EXPECT_NEAR(b.nu1, -32.0 / 207.0, 1e-15);
  EXPECT_FALSE(b.positive);
  EXPECT_GT(b.nu2, 0.0);
  EXPECT_GT(b.nu3, 0.0);
}

TEST(NuLimits, LargeScaleKeepsNu3Positive) {
  for (double c : {1e2, 1e6, 1e12}) {
    const NuBounds b = nu_limits(Vector::Ones(2), Vector::Constant(2, c), 2, 10, 2);
    EXPECT_GT(b.nu3, 0.0);
    EXPECT_LT(b.nu3, 1e-1);
  }
}

TEST(NuLimits, Errors) {
  EXPECT_THROW(nu_limits(Vector::Ones(2), Vector::Ones(2), 2, 2, 2), DomainError);
  EXPECT_THROW(nu_limits(Vector::Ones(2), Vector::Constant(2, 0.5), 2, 8, 2), DomainError);
  EXPECT_THROW(nu_limits(Vector::Ones(2), Vector::Ones(3), 2, 8, 2), DimensionError);
  EXPECT_THROW(nu_limits(Vector::Zero(2), Vector::Ones(2), 2, 8, 2), DomainError);
}

TEST(NuLimits, SmallResidualDofWarns) {
  const NuBounds b = nu_limits(Vector::Ones(3), Vector::Ones(3), 3, 4, 3);
  EXPECT_FALSE(b.warnings.empty());
}

TEST(Rescale, AlreadyPositive) {
  EXPECT_EQ(rescale_C_for_positivity(Vector::Ones(3), Vector::Ones(3), 3, 12, 3), 1.0);
}

TEST(Rescale, RepairsNegativeBound) {
  const Vector d = Vector::Ones(1);
  const Vector c0 = Vector::Ones(1);
  const double g = rescale_C_for_positivity(d, c0, 1, 10, 1);
  EXPECT_GT(g, 1.0);
  EXPECT_TRUE(nu_limits(d, g * c0, 1, 10, 1).positive);
  EXPECT_NEAR(g, 1.05 * 9.0, 1e-12);
}

TEST(Rescale, MonotoneInDeficit) {
  CounterRng rng(1, 0, Stream::kDesign);
  for (int trial = 0; trial < 500; ++trial) {
    const double top = 0.5 + 5.0 * rng.uniform();
    const double rest = top * rng.uniform();
    const Vector d1 = (Vector(2) << top, rest).finished();
    const Vector d2 = (Vector(2) << top * 1.5, rest).finished();
    const double g1 = rescale_C_for_positivity(d1, Vector::Ones(2), 1, 10, 2);
    const double g2 = rescale_C_for_positivity(d2, Vector::Ones(2), 1, 10, 2);
    ASSERT_GE(g2, g1);
    ASSERT_TRUE(nu_limits(d1, g1 * Vector::Ones(2), 1, 10, 2).positive);
  }
}

TEST(NuOfPrior, Mapping) {
  EXPECT_NEAR(nu_of_prior(3, 0.0, 12), 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(nu_of_prior(3, -2.5 + 1e-9, 12), 2e-9 / 9.0, 1e-15);
  for (double a : {-2.4, -1.0, 0.0, 3.7}) {
    EXPECT_NEAR(a_of_nu(3, nu_of_prior(3, a, 12), 12), a, 1e-12);
  }
  EXPECT_THROW(a_of_nu(3, 0.0, 12), DomainError);
  EXPECT_THROW(a_of_nu(3, -1.0, 12), DomainError);
  EXPECT_THROW(nu_of_prior(3, -2.5, 12), DomainError);
}

TEST(ConditionD, Examples) {
  EXPECT_TRUE(condition_d(Vector::Constant(5, 0.3), 5));
  EXPECT_TRUE(condition_d(Vector::Ones(3), 3));
  EXPECT_FALSE(condition_d((Vector(4) << 10.0, 1.0, 1.0, 1.0).finished(), 4));
  EXPECT_THROW(condition_d((Vector(2) << 1.0, 2.0).finished(), 2), DomainError);
}

TEST(NuLimits, ScaleCovariance) {
  const Vector d = (Vector(3) << 2.0, 1.0, 0.3).finished();
  const Vector c = (Vector(3) << 1.0, 2.0, 4.0).finished();
  const NuBounds a = nu_limits(d, c, 4, 15, 3);
  const NuBounds b = nu_limits(7.0 * d, 7.0 * c, 4, 15, 3);
  EXPECT_NEAR(a.nu1, b.nu1, 1e-14);
  EXPECT_NEAR(a.nu2, b.nu2, 1e-14);
  EXPECT_NEAR(a.nu3, b.nu3, 1e-14);
}

}  // namespace
}  // namespace bayespred
