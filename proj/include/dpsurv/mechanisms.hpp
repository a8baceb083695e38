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

// epsilon-DP release of the regularized ERM solution
//
//   J(f; D) = (1/n) sum_i l(f; d_i) + (lambda/2) ||f||^2
//
// by output perturbation (noise added to argmin J) and objective
// perturbation (a random linear term added to J before minimizing). Both
// rely on the bound
//
//   ||grad l(f; d_i) - grad l(f; d_j)|| <= G,
//   G = sum_s sqrt(4 + ||A_s||^2) + max_s sqrt(4 ||A_s||^2 + 4),
//
// which uses |d l_LR / dz| <= 1 and therefore holds for the logit link only.

#ifndef DPSURV_MECHANISMS_HPP_
#define DPSURV_MECHANISMS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/fit_result.hpp"
#include "dpsurv/model.hpp"
#include "dpsurv/optim.hpp"
#include "dpsurv/spline.hpp"

namespace dpsurv {

struct PerturbationConfig {
  double epsilon = 1.0;
  double lambda = 0.0;  // required; must be > 0
  std::uint64_t seed = 0;
  LinkFunction link = LinkFunction::Logit;
  OptimSettings optim;
};

struct ObjPertBudget {
  double epsilon_prime = 0.0;
  double delta = 0.0;  // extra regularization added on top of lambda
};

// G above, from the interval norms ||A_s||.
double gradient_diff_bound(std::span<const double> interval_norms);
double gradient_diff_bound(const SplineBasis& basis);

// L2 sensitivity of argmin J: G / (n lambda).
double out_pert_sensitivity(std::span<const double> interval_norms,
                            std::size_t n, double lambda);
double out_pert_sensitivity(const SplineBasis& basis, std::size_t n,
                            double lambda);

// Splits epsilon between the noise density and the Jacobian factor of the
// objective-perturbation map. With
//
//   c(D) = 2 sum_s log(1 + sqrt(||A_s||^2 + 1) / (4 n (lambda + D))),
//
// returns (epsilon - c(0), 0) when that is at least epsilon/2; otherwise
// bisects for D > 0 with c(D) = epsilon/2 and returns (epsilon/2, D). The
// returned D is the upper end of the final bracket, so c(D) <= epsilon/2.
ObjPertBudget obj_pert_budget(std::span<const double> interval_norms,
                              std::size_t n, double epsilon, double lambda);
ObjPertBudget obj_pert_budget(const SplineBasis& basis, std::size_t n,
                              double epsilon, double lambda);

// Minimizes J with no noise (lambda may be 0).
FitResult fit_nonprivate(const SurvivalDataset& ds, const SplineBasis& basis,
                         double lambda, const OptimSettings& settings = {},
                         LinkFunction link = LinkFunction::Logit);

// Output perturbation: f* = argmin J, then f* + b with
// pdf(b) ~ exp(-epsilon ||b|| / t), t = out_pert_sensitivity. Throws
// NumericError without releasing anything if the optimizer does not
// converge, ConfigError for a non-logit link or invalid epsilon/lambda.
FitResult fit_out_pert(const SurvivalDataset& ds, const SplineBasis& basis,
                       const PerturbationConfig& cfg);

// argmin_f J(f; D) + (1/n) <b, f> + (delta/2) ||f||^2 for a given b.
OptimResult solve_perturbed_objective(const SurvivalDataset& ds,
                                      const SplineBasis& basis, double lambda,
                                      double delta, const Eigen::VectorXd& b,
                                      const OptimSettings& settings = {});

// Objective perturbation: draws b with pdf(b) ~ exp(-epsilon' ||b|| / G)
// (G not divided by n lambda) and releases solve_perturbed_objective(...).
FitResult fit_obj_pert(const SurvivalDataset& ds, const SplineBasis& basis,
                       const PerturbationConfig& cfg);

}  // namespace dpsurv

#endif  // DPSURV_MECHANISMS_HPP_
