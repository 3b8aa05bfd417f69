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

#include "bayespred/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace bayespred {

double integrate_interval(const std::function<double(double)>& f, double lower, double upper,
                          double relative_tolerance) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, lower, upper, relative_tolerance);
}

double integrate_half_line(const std::function<double(double)>& f, double lower,
                           double relative_tolerance) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double t) { return f(lower + t); }, relative_tolerance);
}

double integrate_real_line(const std::function<double(double)>& f, double relative_tolerance) {
  thread_local boost::math::quadrature::sinh_sinh<double> integrator;
  return integrator.integrate(f, relative_tolerance);
}

}  // namespace bayespred
