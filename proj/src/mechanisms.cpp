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

#include "dpsurv/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpsurv/errors.hpp"
#include "dpsurv/noise.hpp"

namespace dpsurv {
namespace {

std::span<const double> norms_of(const SplineBasis& basis) {
  const Eigen::VectorXd& norms = basis.interval_norms();
  return {norms.data(), static_cast<std::size_t>(norms.size())};
}

void validate(const PerturbationConfig& cfg) {
  if (cfg.link != LinkFunction::Logit) {
    throw ConfigError(
        "perturbation mechanisms require the logit link; use the sampler for " +
        std::string(to_string(cfg.link)));
  }
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
    throw ConfigError("epsilon must be finite and > 0");
  }
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    throw ConfigError("lambda must be finite and > 0");
  }
}

void validate_norms(std::span<const double> norms) {
  if (norms.empty()) throw ConfigError("need at least one interval");
}

FitResult base_result(const SurvivalDataset& ds, const SplineBasis& basis,
                      Mechanism mechanism, LinkFunction link) {
  FitResult fit;
  fit.mechanism = mechanism;
  fit.e = basis.num_knots();
  fit.q = basis.num_intervals();
  fit.p = ds.p();
  fit.n = ds.size();
  fit.link = link;
  fit.normalization = ds.normalization();
  return fit;
}

OptimResult minimize_objective(const SurvivalDataset& ds,
                               const SplineBasis& basis, double lambda,
                               const OptimSettings& settings, LinkFunction link) {
  if (ds.empty()) throw EmptyDatasetError("cannot fit an empty dataset");
  if (ds.q() != basis.num_intervals()) {
    throw ShapeError("dataset q does not match the spline basis");
  }
  const ValueAndGradient fn = [&](const Eigen::VectorXd& f, Eigen::VectorXd& g) {
    return objective_value_grad(f, ds, lambda, basis, g, link);
  };
  return minimize(fn, Eigen::VectorXd::Zero(basis.num_knots() + ds.p()), settings);
}

void require_converged(const OptimResult& res) {
  if (!res.converged) {
    throw NumericError("optimizer did not converge (" + res.message +
                       ", gradient norm " + std::to_string(res.grad_norm) +
                       "); no private output released");
  }
}

OptimizerSummary summarize(const OptimResult& res) {
  return {res.iterations, res.grad_norm, res.converged};
}

}  // namespace

double gradient_diff_bound(std::span<const double> interval_norms) {
  validate_norms(interval_norms);
  double sum = 0.0;
  double worst = 0.0;
  for (double a : interval_norms) {
    sum += std::sqrt(4.0 + a * a);
    worst = std::max(worst, std::sqrt(4.0 * a * a + 4.0));
  }
  return sum + worst;
}

double gradient_diff_bound(const SplineBasis& basis) {
  return gradient_diff_bound(norms_of(basis));
}

double out_pert_sensitivity(std::span<const double> interval_norms,
                            std::size_t n, double lambda) {
  if (n == 0) throw ConfigError("n must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  return gradient_diff_bound(interval_norms) /
         (static_cast<double>(n) * lambda);
}

double out_pert_sensitivity(const SplineBasis& basis, std::size_t n,
                            double lambda) {
  return out_pert_sensitivity(norms_of(basis), n, lambda);
}

ObjPertBudget obj_pert_budget(std::span<const double> interval_norms,
                              std::size_t n, double epsilon, double lambda) {
  validate_norms(interval_norms);
  if (n == 0) throw ConfigError("n must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be finite and > 0");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and > 0");
  }
  const double nd = static_cast<double>(n);
  const auto jacobian_cost = [&](double delta) {
    double sum = 0.0;
    for (double a : interval_norms) {
      sum += std::log1p(0.25 * std::sqrt(a * a + 1.0) / (nd * (lambda + delta)));
    }
    return 2.0 * sum;
  };

  const double epsilon_prime = epsilon - jacobian_cost(0.0);
  const double target = 0.5 * epsilon;
  if (epsilon_prime >= target) return {epsilon_prime, 0.0};

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (jacobian_cost(hi) > target) {
    hi *= 2.0;
    if (++doublings > 1'000'000 || !std::isfinite(hi)) {
      throw InternalError("could not bracket the extra regularization");
    }
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (jacobian_cost(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {target, hi};
}

ObjPertBudget obj_pert_budget(const SplineBasis& basis, std::size_t n,
                              double epsilon, double lambda) {
  return obj_pert_budget(norms_of(basis), n, epsilon, lambda);
}

FitResult fit_nonprivate(const SurvivalDataset& ds, const SplineBasis& basis,
                         double lambda, const OptimSettings& settings,
                         LinkFunction link) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  const OptimResult res = minimize_objective(ds, basis, lambda, settings, link);
  require_converged(res);
  FitResult fit = base_result(ds, basis, Mechanism::None, link);
  fit.params = ModelParams::split(res.minimizer, basis.num_knots());
  fit.objective_value = res.value;
  fit.lambda = lambda;
  fit.optimizer = summarize(res);
  return fit;
}

FitResult fit_out_pert(const SurvivalDataset& ds, const SplineBasis& basis,
                       const PerturbationConfig& cfg) {
  validate(cfg);
  const OptimResult res = minimize_objective(ds, basis, cfg.lambda, cfg.optim, cfg.link);
  require_converged(res);

  const double t = out_pert_sensitivity(basis, ds.size(), cfg.lambda);
  Rng rng(cfg.seed);
  const Eigen::VectorXd b =
      sample_gamma_sphere(static_cast<int>(res.minimizer.size()), t / cfg.epsilon, rng);

  FitResult fit = base_result(ds, basis, Mechanism::OutPert, cfg.link);
  fit.params = ModelParams::split(res.minimizer + b, basis.num_knots());
  fit.objective_value = res.value;
  fit.epsilon = cfg.epsilon;
  fit.lambda = cfg.lambda;
  fit.sensitivity_t = t;
  fit.seed = cfg.seed;
  fit.optimizer = summarize(res);
  fit.noise = b;
  return fit;
}

OptimResult solve_perturbed_objective(const SurvivalDataset& ds,
                                      const SplineBasis& basis, double lambda,
                                      double delta, const Eigen::VectorXd& b,
                                      const OptimSettings& settings) {
  if (ds.empty()) throw EmptyDatasetError("cannot fit an empty dataset");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  const int dim = basis.num_knots() + ds.p();
  if (b.size() != dim) throw ShapeError("noise vector has the wrong length");
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  const ValueAndGradient fn = [&](const Eigen::VectorXd& f, Eigen::VectorXd& g) {
    const double value = objective_value_grad(f, ds, lambda, basis, g);
    g.noalias() += inv_n * b + delta * f;
    return value + inv_n * b.dot(f) + 0.5 * delta * f.squaredNorm();
  };
  return minimize(fn, Eigen::VectorXd::Zero(dim), settings);
}

FitResult fit_obj_pert(const SurvivalDataset& ds, const SplineBasis& basis,
                       const PerturbationConfig& cfg) {
  validate(cfg);
  if (ds.empty()) throw EmptyDatasetError("cannot fit an empty dataset");
  const ObjPertBudget budget = obj_pert_budget(basis, ds.size(), cfg.epsilon, cfg.lambda);
  const double t = gradient_diff_bound(basis);
  Rng rng(cfg.seed);
  const Eigen::VectorXd b = sample_gamma_sphere(basis.num_knots() + ds.p(),
                                                t / budget.epsilon_prime, rng);
  const OptimResult res =
      solve_perturbed_objective(ds, basis, cfg.lambda, budget.delta, b, cfg.optim);
  require_converged(res);

  FitResult fit = base_result(ds, basis, Mechanism::ObjPert, cfg.link);
  fit.params = ModelParams::split(res.minimizer, basis.num_knots());
  fit.objective_value = res.value;
  fit.epsilon = cfg.epsilon;
  fit.epsilon_prime = budget.epsilon_prime;
  fit.lambda = cfg.lambda;
  fit.delta = budget.delta;
  fit.sensitivity_t = t;
  fit.seed = cfg.seed;
  fit.optimizer = summarize(res);
  fit.noise = b;
  return fit;
}

}  // namespace dpsurv
