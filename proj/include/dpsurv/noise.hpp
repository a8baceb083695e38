// Copyright 2026 The dpsurv Authors
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

#ifndef DPSURV_NOISE_HPP_
#define DPSURV_NOISE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace dpsurv {

// Seeded random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every transform on top of it
// (uniform, normal, gamma) is implemented here rather than taken from
// <random>, whose distributions differ between standard libraries. A given
// seed therefore produces the same stream on every conforming toolchain.
//
// Not thread-safe. Concurrent tasks each take their own Rng built from
// derive_seed(base, task_index).
//
// Not a cryptographically secure generator, and floating-point noise
// sampling is known to leak through low-order bits; see the README.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  // Standard normal (Marsaglia polar method, caching the second variate).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mix of (base, stream); gives well-separated seeds for
// independent streams derived from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// A seed from the operating system's entropy source.
std::uint64_t entropy_seed();

// Gamma(shape, scale) by Marsaglia and Tsang's squeeze/rejection method.
// Throws ConfigError unless shape >= 1 and scale > 0.
double sample_gamma(double shape, double scale, Rng& rng);

// Uniform direction on the unit sphere in R^d.
Eigen::VectorXd sample_unit_sphere(int d, Rng& rng);

// Vector b in R^d with density proportional to exp(-||b|| / scale): the
// radius is Gamma(d, scale) and the direction is uniform.
Eigen::VectorXd sample_gamma_sphere(int d, double scale, Rng& rng);

// Independent N(0, variances[i]) coordinates. Throws ConfigError for a
// negative or non-finite variance.
Eigen::VectorXd sample_gaussian_diag(const Eigen::VectorXd& variances, Rng& rng);

}  // namespace dpsurv

#endif  // DPSURV_NOISE_HPP_
