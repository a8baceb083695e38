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

#ifndef DPSURV_SPLINE_HPP_
#define DPSURV_SPLINE_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

namespace dpsurv {

// Natural cubic spline basis on e equally spaced knots k_j = (j-1)/(e-1)
// over [0,1], in the truncated-power form
//
//   b_1(t) = 1,  b_2(t) = t,  b_{i+2}(t) = d_i(t) - d_{e-1}(t),  i = 1..e-2,
//   d_j(t) = (max(t - k_j, 0)^3 - max(t - k_e, 0)^3) / (k_e - k_j).
//
// The d-indexed family runs over i = 1..e-2 so the basis has exactly e
// functions. Each discrete interval s = 1..q is represented by the time
// r_s = s/q, and A_s = [b_1(r_s), ..., b_e(r_s)] is cached.
class SplineBasis {
 public:
  // Throws ConfigError unless e >= 2 and q >= 1.
  SplineBasis(int e, int q);

  int num_knots() const { return static_cast<int>(knots_.size()); }
  int num_intervals() const { return static_cast<int>(interval_vectors_.rows()); }
  const std::vector<double>& knots() const { return knots_; }

  // A_s for s in 1..q. Throws BoundsError otherwise.
  Eigen::VectorXd interval_vector(int s) const;
  // Row s-1 holds A_s.
  const Eigen::MatrixXd& interval_matrix() const { return interval_vectors_; }
  // ||A_s|| for s = 1..q, stored at index s-1.
  const Eigen::VectorXd& interval_norms() const { return interval_norms_; }

  // [b_1(t), ..., b_e(t)]; throws DomainError unless 0 <= t <= 1.
  Eigen::VectorXd eval(double t) const;

 private:
  std::vector<double> knots_;
  Eigen::MatrixXd interval_vectors_;
  Eigen::VectorXd interval_norms_;
};

SplineBasis build_basis(int e, int q);
Eigen::VectorXd eval_basis(const SplineBasis& basis, double t);
Eigen::VectorXd basis_norms(const SplineBasis& basis);

// Representative time of interval s.
inline double interval_time(int s, int q) {
  return static_cast<double>(s) / static_cast<double>(q);
}

// Evaluates the basis for arbitrary real t (the spline continues linearly
// past both boundary knots). No domain check; used for derivative probes.
Eigen::VectorXd natural_spline_basis(std::span<const double> knots, double t);

}  // namespace dpsurv

#endif  // DPSURV_SPLINE_HPP_
