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

#include "dpsurv/noise.hpp"

#include <cmath>
#include <string>

#include "dpsurv/errors.hpp"

namespace dpsurv {

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  // (k + 0.5) / 2^53 for k in [0, 2^53).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ConfigError("uniform_index needs n > 0");
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

double sample_gamma(double shape, double scale, Rng& rng) {
  if (!(shape >= 1.0) || !std::isfinite(shape)) {
    throw ConfigError("gamma shape must be >= 1, got " + std::to_string(shape));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("gamma scale must be > 0, got " + std::to_string(scale));
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    const double z = rng.normal();
    const double root = 1.0 + c * z;
    if (root <= 0.0) continue;
    const double v = root * root * root;
    const double u = rng.uniform_open();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2 ||
        std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

Eigen::VectorXd sample_unit_sphere(int d, Rng& rng) {
  if (d < 1) throw ConfigError("sphere dimension must be >= 1");
  Eigen::VectorXd dir(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) dir[i] = rng.normal();
    norm = dir.norm();
  } while (norm == 0.0);
  return dir / norm;
}

Eigen::VectorXd sample_gamma_sphere(int d, double scale, Rng& rng) {
  if (d < 1) throw ConfigError("noise dimension must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("noise scale must be > 0, got " + std::to_string(scale));
  }
  const double radius = sample_gamma(static_cast<double>(d), scale, rng);
  return radius * sample_unit_sphere(d, rng);
}

Eigen::VectorXd sample_gaussian_diag(const Eigen::VectorXd& variances, Rng& rng) {
  Eigen::VectorXd out(variances.size());
  for (Eigen::Index i = 0; i < variances.size(); ++i) {
    const double var = variances[i];
    if (!(var >= 0.0) || !std::isfinite(var)) {
      throw ConfigError("variance must be finite and >= 0");
    }
    out[i] = std::sqrt(var) * rng.normal();
  }
  return out;
}

}  // namespace dpsurv
