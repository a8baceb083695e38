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

// Generators and independent reference computations shared by the tests.
// Nothing here calls into the code under test beyond constructing inputs.

#ifndef DPSURV_TESTS_SUPPORT_HPP_
#define DPSURV_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/spline.hpp"

namespace dpsurv::testing {

// Test-side randomness comes from std::mt19937_64 directly so the
// generators do not depend on the library's Rng.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>()(engine_); }

  Eigen::VectorXd vector(int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }

  // Uniform in the unit ball, via rejection from the cube.
  Eigen::VectorXd in_ball(int p) {
    while (true) {
      Eigen::VectorXd v(p);
      for (int i = 0; i < p; ++i) v[i] = uniform(-1.0, 1.0);
      if (v.norm() <= 1.0) return v;
    }
  }

  SurvivalRecord record(int p, int q) {
    SurvivalRecord d;
    d.x = in_ball(p);
    d.t = integer(1, q);
    d.y = integer(0, 1) == 1 ? 1 : -1;
    return d;
  }

  SurvivalDataset dataset(std::size_t n, int p, int q) {
    std::vector<SurvivalRecord> records;
    for (std::size_t i = 0; i < n; ++i) records.push_back(record(p, q));
    return SurvivalDataset(std::move(records), q, p);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// log(1 + exp(z)) written the obvious way; fine for |z| < 30.
inline double naive_log1pexp(double z) { return std::log(1.0 + std::exp(z)); }

// Record loss under the logit link straight from the likelihood, using the
// basis only through A_s = basis.interval_vector(s).
inline double naive_logit_loss(const Eigen::VectorXd& f, const SurvivalRecord& d,
                               const SplineBasis& basis) {
  const int e = basis.num_knots();
  double total = 0.0;
  for (int s = 1; s <= d.t; ++s) {
    Eigen::VectorXd xs(e + d.x.size());
    xs << basis.interval_vector(s), d.x;
    const double eta = f.dot(xs);
    const double h = 1.0 / (1.0 + std::exp(-eta));
    if (s < d.t || d.y < 0) {
      total -= std::log(1.0 - h);
    } else {
      total -= std::log(h);
    }
  }
  return total;
}

// Central finite differences of a scalar function.
inline Eigen::VectorXd central_difference(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (fn(up) - fn(down)) / (2.0 * h);
  }
  return g;
}

inline double relative_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// CDF of Gamma(k, scale) for integer shape k (Erlang):
// 1 - exp(-x) sum_{j<k} x^j / j!, with x = value / scale.
inline double erlang_cdf(double value, int k, double scale) {
  if (value <= 0.0) return 0.0;
  const double x = value / scale;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= x / j;
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

// One-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max({d, c - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - c});
  }
  return d;
}

// Asymptotic KS critical value at significance 0.01.
inline double ks_critical_001(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

// Bisection on a decreasing function, independent of the library's solver.
inline double bisect_decreasing(const std::function<double(double)>& fn, double target,
                                double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dpsurv::testing

#endif  // DPSURV_TESTS_SUPPORT_HPP_
