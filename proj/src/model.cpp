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

#include "dpsurv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dpsurv/errors.hpp"

namespace dpsurv {
namespace {

// -log of the clamp bound; the loss value of a clamped term.
const double kClampedLoss = -std::log(kHazardClamp);
const double kClampedLossUpper = -std::log1p(-kHazardClamp);

struct Term {
  double value;  // -log(prob)
  double deriv;  // d value / d eta
};

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// -log p and its derivative for a probability p(eta) with dp/deta = dp,
// clamped to [kHazardClamp, 1 - kHazardClamp].
Term clamped_neg_log(double p, double dp) {
  if (p < kHazardClamp) return {kClampedLoss, 0.0};
  if (p > 1.0 - kHazardClamp) return {kClampedLossUpper, 0.0};
  return {-std::log(p), -dp / p};
}

// -log(1 - h(eta)).
template <LinkFunction L>
Term survival_term(double eta) {
  if constexpr (L == LinkFunction::Logit) {
    const double z = std::exp(-std::abs(eta));
    const double l1 = std::log1p(z);
    return {l1 + std::max(eta, 0.0), eta >= 0.0 ? 1.0 / (1.0 + z) : z / (1.0 + z)};
  } else if constexpr (L == LinkFunction::Cloglog) {
    // 1 - h = exp(-exp(eta)).
    const double u = std::exp(eta);
    if (u > kClampedLoss) return {kClampedLoss, 0.0};
    if (u < kClampedLossUpper) return {kClampedLossUpper, 0.0};
    return {u, u};
  } else {
    return clamped_neg_log(normal_cdf(-eta), -normal_pdf(eta));
  }
}

// -log h(eta).
template <LinkFunction L>
Term event_term(double eta) {
  if constexpr (L == LinkFunction::Logit) {
    const double z = std::exp(-std::abs(eta));
    const double l1 = std::log1p(z);
    return {l1 + std::max(-eta, 0.0),
            -(eta >= 0.0 ? z / (1.0 + z) : 1.0 / (1.0 + z))};
  } else if constexpr (L == LinkFunction::Cloglog) {
    const double u = std::exp(eta);
    const double h = -std::expm1(-u);
    if (h < kHazardClamp) return {kClampedLoss, 0.0};
    if (h > 1.0 - kHazardClamp) return {kClampedLossUpper, 0.0};
    return {-std::log(h), -u / std::expm1(u)};
  } else {
    return clamped_neg_log(normal_cdf(eta), normal_pdf(eta));
  }
}

template <LinkFunction L>
double record_terms(const double* baseline, double xb, int y, int t,
                    double* deta) {
  double total = 0.0;
  for (int s = 0; s + 1 < t; ++s) {
    const Term term = survival_term<L>(baseline[s] + xb);
    total += term.value;
    deta[s] = term.deriv;
  }
  const double eta = baseline[t - 1] + xb;
  const Term last = y > 0 ? event_term<L>(eta) : survival_term<L>(eta);
  deta[t - 1] = last.deriv;
  return total + last.value;
}

void check_record(const SurvivalRecord& d, const SplineBasis& basis, int p) {
  if (d.x.size() != p) {
    throw ShapeError("record has " + std::to_string(d.x.size()) +
                     " covariates, expected " + std::to_string(p));
  }
  if (d.t < 1 || d.t > basis.num_intervals()) {
    throw BoundsError("record interval " + std::to_string(d.t) +
                      " outside 1.." + std::to_string(basis.num_intervals()));
  }
}

}  // namespace

std::string_view to_string(LinkFunction link) {
  switch (link) {
    case LinkFunction::Logit:
      return "logit";
    case LinkFunction::Cloglog:
      return "cloglog";
    case LinkFunction::Probit:
      return "probit";
  }
  return "unknown";
}

LinkFunction parse_link(std::string_view name) {
  if (name == "logit") return LinkFunction::Logit;
  if (name == "cloglog") return LinkFunction::Cloglog;
  if (name == "probit") return LinkFunction::Probit;
  throw ConfigError("unknown link function '" + std::string(name) + "'");
}

Eigen::VectorXd ModelParams::stacked() const {
  Eigen::VectorXd f(alpha.size() + beta.size());
  f << alpha, beta;
  return f;
}

ModelParams ModelParams::split(const Eigen::VectorXd& f, int e) {
  if (e < 0 || e > f.size()) throw ShapeError("cannot split parameter vector");
  return ModelParams{f.head(e), f.tail(f.size() - e)};
}

double logistic_loss(double x) {
  if (x < 0.0) return -x + std::log1p(std::exp(x));
  return std::log1p(std::exp(-x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double inverse_link(LinkFunction link, double eta) {
  switch (link) {
    case LinkFunction::Logit:
      return sigmoid(eta);
    case LinkFunction::Cloglog:
      return std::clamp(-std::expm1(-std::exp(eta)), kHazardClamp,
                        1.0 - kHazardClamp);
    case LinkFunction::Probit:
      return std::clamp(normal_cdf(eta), kHazardClamp, 1.0 - kHazardClamp);
  }
  throw InternalError("unhandled link function");
}

void check_param_shape(const Eigen::VectorXd& f, const SplineBasis& basis,
                       int p) {
  if (f.size() != basis.num_knots() + p) {
    throw ShapeError("parameter vector has length " + std::to_string(f.size()) +
                     ", expected e + p = " +
                     std::to_string(basis.num_knots() + p));
  }
}

Eigen::VectorXd augmented_covariate(const SplineBasis& basis,
                                    const Eigen::VectorXd& x, int s) {
  const Eigen::VectorXd a = basis.interval_vector(s);
  Eigen::VectorXd out(a.size() + x.size());
  out << a, x;
  return out;
}

LossEvaluator::LossEvaluator(const SplineBasis& basis, int p,
                             LinkFunction link)
    : basis_(&basis),
      e_(basis.num_knots()),
      p_(p),
      q_(basis.num_intervals()),
      link_(link),
      beta_(Eigen::VectorXd::Zero(p)),
      baseline_(Eigen::VectorXd::Zero(q_)),
      interval_weights_(Eigen::VectorXd::Zero(q_)),
      beta_grad_(Eigen::VectorXd::Zero(p)) {}

void LossEvaluator::set_params(const Eigen::VectorXd& f) {
  check_param_shape(f, *basis_, p_);
  baseline_.noalias() = basis_->interval_matrix() * f.head(e_);
  beta_ = f.tail(p_);
}

double LossEvaluator::loss_terms(const SurvivalRecord& d, double* deta) const {
  check_record(d, *basis_, p_);
  const double xb = beta_.dot(d.x);
  switch (link_) {
    case LinkFunction::Logit:
      return record_terms<LinkFunction::Logit>(baseline_.data(), xb, d.y, d.t, deta);
    case LinkFunction::Cloglog:
      return record_terms<LinkFunction::Cloglog>(baseline_.data(), xb, d.y, d.t, deta);
    case LinkFunction::Probit:
      return record_terms<LinkFunction::Probit>(baseline_.data(), xb, d.y, d.t, deta);
  }
  throw InternalError("unhandled link function");
}

double LossEvaluator::loss(const SurvivalRecord& d) const {
  std::vector<double> scratch(static_cast<std::size_t>(q_));
  return loss_terms(d, scratch.data());
}

void LossEvaluator::add_gradient(const SurvivalRecord& d, const double* deta,
                                 double weight) {
  double sum = 0.0;
  for (int s = 0; s < d.t; ++s) {
    interval_weights_[s] += weight * deta[s];
    sum += deta[s];
  }
  beta_grad_.noalias() += (weight * sum) * d.x;
}

void LossEvaluator::flush_gradient(Eigen::VectorXd& out) {
  out.resize(e_ + p_);
  out.head(e_).noalias() = basis_->interval_matrix().transpose() * interval_weights_;
  out.tail(p_) = beta_grad_;
  interval_weights_.setZero();
  beta_grad_.setZero();
}

double record_loss(const Eigen::VectorXd& f, const SurvivalRecord& d,
                   const SplineBasis& basis, LinkFunction link) {
  LossEvaluator eval(basis, static_cast<int>(d.x.size()), link);
  eval.set_params(f);
  return eval.loss(d);
}

Eigen::VectorXd record_grad(const Eigen::VectorXd& f, const SurvivalRecord& d,
                            const SplineBasis& basis, LinkFunction link) {
  LossEvaluator eval(basis, static_cast<int>(d.x.size()), link);
  eval.set_params(f);
  std::vector<double> deta(static_cast<std::size_t>(basis.num_intervals()));
  eval.loss_terms(d, deta.data());
  eval.add_gradient(d, deta.data(), 1.0);
  Eigen::VectorXd grad;
  eval.flush_gradient(grad);
  return grad;
}

double total_loss_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                       const SplineBasis& basis, Eigen::VectorXd& grad,
                       LinkFunction link) {
  if (ds.q() != basis.num_intervals()) {
    throw ShapeError("dataset q does not match the spline basis");
  }
  LossEvaluator eval(basis, ds.p(), link);
  eval.set_params(f);
  std::vector<double> deta(static_cast<std::size_t>(basis.num_intervals()));
  double total = 0.0;
  for (const SurvivalRecord& d : ds) {
    total += eval.loss_terms(d, deta.data());
    eval.add_gradient(d, deta.data(), 1.0);
  }
  eval.flush_gradient(grad);
  return total;
}

double objective_value_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                            double lambda, const SplineBasis& basis,
                            Eigen::VectorXd& grad, LinkFunction link) {
  if (ds.empty()) throw EmptyDatasetError("objective of an empty dataset");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  const double total = total_loss_grad(f, ds, basis, grad, link);
  grad *= inv_n;
  grad.noalias() += lambda * f;
  return total * inv_n + 0.5 * lambda * f.squaredNorm();
}

double objective(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                 double lambda, const SplineBasis& basis) {
  Eigen::VectorXd grad;
  return objective_value_grad(f, ds, lambda, basis, grad);
}

Eigen::VectorXd objective_grad(const Eigen::VectorXd& f,
                               const SurvivalDataset& ds, double lambda,
                               const SplineBasis& basis) {
  Eigen::VectorXd grad;
  objective_value_grad(f, ds, lambda, basis, grad);
  return grad;
}

HazardCurve hazard_and_survival(const Eigen::VectorXd& f,
                                const Eigen::VectorXd& x,
                                const SplineBasis& basis, LinkFunction link) {
  const int p = static_cast<int>(x.size());
  check_param_shape(f, basis, p);
  const int e = basis.num_knots();
  const int q = basis.num_intervals();
  const Eigen::VectorXd baseline = basis.interval_matrix() * f.head(e);
  const double xb = f.tail(p).dot(x);

  HazardCurve curve;
  curve.hazard.resize(q);
  curve.survival.resize(q + 1);
  curve.survival[0] = 1.0;
  for (int s = 0; s < q; ++s) {
    const double eta = baseline[s] + xb;
    if (!std::isfinite(eta)) {
      throw NumericError("non-finite linear predictor in interval " +
                         std::to_string(s + 1));
    }
    curve.hazard[s] = inverse_link(link, eta);
    curve.survival[s + 1] = curve.survival[s] * (1.0 - curve.hazard[s]);
  }
  return curve;
}

}  // namespace dpsurv
