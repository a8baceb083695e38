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

#ifndef DPSURV_OPTIM_HPP_
#define DPSURV_OPTIM_HPP_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/errors.hpp"

namespace dpsurv {

struct OptimSettings {
  double grad_tol = 1e-8;  // stop when ||grad|| <= grad_tol
  int max_iters = 500;
  int memory = 10;  // number of stored (s, y) correction pairs
};

struct OptimResult {
  Eigen::VectorXd minimizer;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  // Objective value at the start point and after every accepted step.
  std::vector<double> trace;
  std::string message;
};

// Evaluates the objective at x, writing the gradient into grad.
using ValueAndGradient =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Thrown when the objective returns a non-finite value or gradient.
class OptimizationError : public NumericError {
 public:
  OptimizationError(const std::string& what, Eigen::VectorXd last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const Eigen::VectorXd& last_good_iterate() const { return last_good_; }

 private:
  Eigen::VectorXd last_good_;
};

// Limited-memory BFGS with a line search enforcing the strong Wolfe
// conditions (c1 = 1e-4, c2 = 0.9). Once the objective decrease falls below
// floating-point resolution the line search accepts steps satisfying the
// approximate Wolfe conditions of Hager and Zhang, which lets the gradient
// reach tolerances far below sqrt(machine epsilon). If the line search
// fails, the best iterate so far is returned with converged = false.
OptimResult minimize(const ValueAndGradient& objective,
                     const Eigen::VectorXd& x0,
                     const OptimSettings& settings = {});

}  // namespace dpsurv

#endif  // DPSURV_OPTIM_HPP_
