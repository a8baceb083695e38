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

// Discrete-time survival regression with a spline baseline hazard.
//
// For parameters f = [alpha; beta] and a record d = (x, y, t), the linear
// predictor in interval s is eta_s = f . [A_s; x], the hazard is
// h(s) = g^{-1}(eta_s), and the negative log-likelihood contribution is
//
//   l(f; d) = sum_{s<t} -log(1 - h(s)) + (y > 0 ? -log h(t) : -log(1 - h(t))).
//
// Under the logit link this is l_LR(y eta_t) + sum_{s<t} l_LR(-eta_s) with
// l_LR(z) = log(1 + exp(-z)).

#ifndef DPSURV_MODEL_HPP_
#define DPSURV_MODEL_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/spline.hpp"

namespace dpsurv {

enum class LinkFunction { Logit, Cloglog, Probit };

std::string_view to_string(LinkFunction link);
// Accepts "logit", "cloglog", "probit"; throws ConfigError otherwise.
LinkFunction parse_link(std::string_view name);

// Baseline-hazard coefficients alpha (length e) and covariate effects beta
// (length p). Most routines work on the stacked vector f = [alpha; beta].
struct ModelParams {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  Eigen::VectorXd stacked() const;
  static ModelParams split(const Eigen::VectorXd& f, int e);
};

// Hazards from non-logit links are kept inside [kHazardClamp, 1 - kHazardClamp].
inline constexpr double kHazardClamp = 1e-12;

// log(1 + exp(-x)), evaluated without overflow.
double logistic_loss(double x);
// 1 / (1 + exp(-x)).
double sigmoid(double x);
// Standard normal CDF.
double normal_cdf(double x);
// Inverse link: hazard for linear predictor eta.
double inverse_link(LinkFunction link, double eta);

// x^s = [A_s; x]. Throws BoundsError for s outside 1..q.
Eigen::VectorXd augmented_covariate(const SplineBasis& basis,
                                    const Eigen::VectorXd& x, int s);

double record_loss(const Eigen::VectorXd& f, const SurvivalRecord& d,
                   const SplineBasis& basis,
                   LinkFunction link = LinkFunction::Logit);
Eigen::VectorXd record_grad(const Eigen::VectorXd& f, const SurvivalRecord& d,
                            const SplineBasis& basis,
                            LinkFunction link = LinkFunction::Logit);

// Evaluates losses and gradients for many records at one parameter value.
// set_params() caches gamma(r_s) = alpha . A_s for every interval so each
// record costs O(t + p). Not thread-safe; use one evaluator per thread.
class LossEvaluator {
 public:
  LossEvaluator(const SplineBasis& basis, int p,
                LinkFunction link = LinkFunction::Logit);

  int dim() const { return e_ + p_; }
  void set_params(const Eigen::VectorXd& f);

  // l(f; d) at the cached parameters.
  double loss(const SurvivalRecord& d) const;

  // Returns l(f; d) and writes dl/d(eta_s) for s = 1..t into
  // deta[0..t-1]; `deta` must hold at least q entries.
  double loss_terms(const SurvivalRecord& d, double* deta) const;

  // grad_accum += weight * sum_s deta[s-1] * [A_s; x] for s = 1..t, using
  // the interval-weight buffer so the A-part costs O(q e) once per call to
  // flush_gradient() instead of once per record.
  void add_gradient(const SurvivalRecord& d, const double* deta, double weight);
  // Writes the accumulated gradient into `out` (size e+p) and clears it.
  void flush_gradient(Eigen::VectorXd& out);

 private:
  const SplineBasis* basis_;
  int e_;
  int p_;
  int q_;
  LinkFunction link_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd baseline_;
  Eigen::VectorXd interval_weights_;
  Eigen::VectorXd beta_grad_;
};

// Mean loss over the dataset plus (lambda/2)||f||^2.
double objective(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                 double lambda, const SplineBasis& basis);
// (1/n) sum grad l + lambda f.
Eigen::VectorXd objective_grad(const Eigen::VectorXd& f,
                               const SurvivalDataset& ds, double lambda,
                               const SplineBasis& basis);
// Both at once; `grad` is resized as needed.
double objective_value_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                            double lambda, const SplineBasis& basis,
                            Eigen::VectorXd& grad,
                            LinkFunction link = LinkFunction::Logit);

// Sum of record losses and the summed gradient (no averaging, no penalty).
double total_loss_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                       const SplineBasis& basis, Eigen::VectorXd& grad,
                       LinkFunction link = LinkFunction::Logit);

struct HazardCurve {
  Eigen::VectorXd hazard;    // h(s), s = 1..q at index s-1
  Eigen::VectorXd survival;  // S(t), t = 1..q+1 at index t-1; S(1) = 1
};

// Per-interval hazard and survival for covariates x. Throws NumericError if
// a linear predictor is non-finite.
HazardCurve hazard_and_survival(const Eigen::VectorXd& f,
                                const Eigen::VectorXd& x,
                                const SplineBasis& basis, LinkFunction link);

void check_param_shape(const Eigen::VectorXd& f, const SplineBasis& basis,
                       int p);

}  // namespace dpsurv

#endif  // DPSURV_MODEL_HPP_
