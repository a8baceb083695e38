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

#include "dpsurv/spline.hpp"

#include <algorithm>
#include <string>

#include "dpsurv/errors.hpp"

namespace dpsurv {
namespace {

double cube_pos(double x) { return x > 0.0 ? x * x * x : 0.0; }

double truncated_cubic(std::span<const double> knots, std::size_t j, double t) {
  const double last = knots.back();
  return (cube_pos(t - knots[j]) - cube_pos(t - last)) / (last - knots[j]);
}

}  // namespace

Eigen::VectorXd natural_spline_basis(std::span<const double> knots, double t) {
  const std::size_t e = knots.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(e));
  b[0] = 1.0;
  b[1] = t;
  if (e > 2) {
    const double tail = truncated_cubic(knots, e - 2, t);
    for (std::size_t i = 0; i + 2 < e; ++i) {
      b[static_cast<Eigen::Index>(i + 2)] = truncated_cubic(knots, i, t) - tail;
    }
  }
  return b;
}

SplineBasis::SplineBasis(int e, int q) {
  if (e < 2) {
    throw ConfigError("spline needs at least 2 knots, got e = " +
                      std::to_string(e));
  }
  if (q < 1) throw ConfigError("q must be >= 1, got " + std::to_string(q));
  knots_.resize(static_cast<std::size_t>(e));
  for (int j = 0; j < e; ++j) {
    knots_[static_cast<std::size_t>(j)] =
        static_cast<double>(j) / static_cast<double>(e - 1);
  }
  interval_vectors_.resize(q, e);
  for (int s = 1; s <= q; ++s) {
    interval_vectors_.row(s - 1) =
        natural_spline_basis(knots_, interval_time(s, q)).transpose();
  }
  interval_norms_ = interval_vectors_.rowwise().norm();
}

Eigen::VectorXd SplineBasis::interval_vector(int s) const {
  if (s < 1 || s > num_intervals()) {
    throw BoundsError("interval " + std::to_string(s) + " outside 1.." +
                      std::to_string(num_intervals()));
  }
  return interval_vectors_.row(s - 1).transpose();
}

Eigen::VectorXd SplineBasis::eval(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("spline argument " + std::to_string(t) +
                      " outside [0,1]");
  }
  return natural_spline_basis(knots_, t);
}

SplineBasis build_basis(int e, int q) { return SplineBasis(e, q); }

Eigen::VectorXd eval_basis(const SplineBasis& basis, double t) {
  return basis.eval(t);
}

Eigen::VectorXd basis_norms(const SplineBasis& basis) {
  return basis.interval_norms();
}

}  // namespace dpsurv
