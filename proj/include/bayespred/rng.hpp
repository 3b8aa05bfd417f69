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

#ifndef BAYESPRED_RNG_HPP
#define BAYESPRED_RNG_HPP

#include <array>
#include <cstdint>

/**
 * \file
 * \brief Counter-based random numbers (Philox4x32-10) and the samplers built on them.
 *
 * Every stream is addressed by (seed, index, stream): the seed forms the key and the
 * replication index plus a purpose tag form the upper counter words. Two streams with
 * different addresses never share a block, so replications can run in any order or on
 * any thread and still draw identical numbers.
 */

namespace bayespred {

/// The Philox4x32 bijection with 10 rounds.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter counter, Key key);
};

/// Purpose tags that keep independent consumers of one replication apart.
enum class Stream : std::uint32_t {
  kObservation = 0,
  kNormalization = 1,
  kInnerMonteCarlo = 2,
  kIdentity = 3,
  kDesign = 4,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index, Stream stream = Stream::kObservation);

  std::uint32_t next_u32();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Gamma(shape, scale) by Marsaglia-Tsang rejection.
  double gamma(double shape, double scale = 1.0);

  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

 private:
  void refill();

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter block_{};
  int position_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace bayespred

#endif
