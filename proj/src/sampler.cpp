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

#include "dpsurv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpsurv/errors.hpp"

namespace dpsurv {
namespace {

// Reusable buffers for repeated minibatch gradients at changing f.
class GradientWorkspace {
 public:
  GradientWorkspace(const SplineBasis& basis, int p, LinkFunction link)
      : eval_(basis, p, link), deta_(basis.num_intervals()) {}

  void compute(const Eigen::VectorXd& f, const SurvivalDataset& ds,
               const SanitizerConfig& sanitizer, double epsilon,
               const std::vector<std::size_t>& batch, Eigen::VectorXd& out) {
    eval_.set_params(f);
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (std::size_t idx : batch) {
      const SurvivalRecord& d = ds[idx];
      const double loss = eval_.loss_terms(d, deta_.data());
      eval_.add_gradient(d, deta_.data(), weight * sanitize_deriv(loss, sanitizer.v));
    }
    eval_.flush_gradient(out);
    out.noalias() += (sanitizer.sigma / static_cast<double>(ds.size())) * f;
    out *= epsilon / (2.0 * sanitizer.v);
  }

 private:
  LossEvaluator eval_;
  std::vector<double> deta_;
};

void check_dim(const Eigen::VectorXd& f, const SplineBasis& basis,
               const SurvivalDataset& ds) {
  if (f.size() != basis.num_knots() + ds.p()) {
    throw ShapeError("parameter vector has length " + std::to_string(f.size()) +
                     ", expected " + std::to_string(basis.num_knots() + ds.p()));
  }
  if (ds.q() != basis.num_intervals()) {
    throw ShapeError("dataset q does not match the spline basis");
  }
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be finite and > 0");
  }
}

}  // namespace

SanitizerConfig SanitizerConfig::defaults(std::size_t n, double epsilon) {
  if (n < 2) throw ConfigError("the default loss cap 2 log n needs n >= 2");
  check_epsilon(epsilon);
  SanitizerConfig cfg;
  cfg.v = 2.0 * std::log(static_cast<double>(n));
  cfg.sigma = 1e-2 * 2.0 * cfg.v / epsilon;
  return cfg;
}

void SanitizerConfig::validate() const {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("v must be finite and > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("sigma must be finite and >= 0");
  }
}

double sanitize(double x, double v) { return v * std::tanh(x / v); }

double sanitize_deriv(double x, double v) {
  // sech^2(a) = 4 e^{-2|a|} / (1 + e^{-2|a|})^2, which cannot overflow.
  const double e = std::exp(-2.0 * std::abs(x / v));
  const double denom = 1.0 + e;
  return 4.0 * e / (denom * denom);
}

double utility(const Eigen::VectorXd& f, const SurvivalDataset& ds,
               const SplineBasis& basis, const SanitizerConfig& cfg,
               LinkFunction link) {
  cfg.validate();
  check_dim(f, basis, ds);
  LossEvaluator eval(basis, ds.p(), link);
  eval.set_params(f);
  double sum = 0.0;
  for (const SurvivalRecord& d : ds) sum += sanitize(eval.loss(d), cfg.v);
  return -0.5 * cfg.sigma * f.squaredNorm() - sum;
}

double utility_value_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                          const SplineBasis& basis, const SanitizerConfig& cfg,
                          Eigen::VectorXd& grad, LinkFunction link) {
  cfg.validate();
  check_dim(f, basis, ds);
  LossEvaluator eval(basis, ds.p(), link);
  eval.set_params(f);
  std::vector<double> deta(basis.num_intervals());
  double sum = 0.0;
  for (const SurvivalRecord& d : ds) {
    const double loss = eval.loss_terms(d, deta.data());
    sum += sanitize(loss, cfg.v);
    eval.add_gradient(d, deta.data(), -sanitize_deriv(loss, cfg.v));
  }
  eval.flush_gradient(grad);
  grad.noalias() -= cfg.sigma * f;
  return -0.5 * cfg.sigma * f.squaredNorm() - sum;
}

std::size_t PsgldConfig::resolved_steps(std::size_t n) const {
  return steps.value_or(250 * n);
}

std::size_t PsgldConfig::resolved_batch_size(std::size_t n) const {
  return batch_size.value_or(std::min<std::size_t>(200, n));
}

void PsgldConfig::validate(std::size_t n, int dim) const {
  if (n == 0) throw EmptyDatasetError("cannot sample from an empty dataset");
  if (!(tau > 0.5 && tau <= 1.0)) throw ConfigError("tau must lie in (0.5, 1]");
  if (!(lambda_pc > 0.0) || !std::isfinite(lambda_pc)) {
    throw ConfigError("lambda_pc must be finite and > 0");
  }
  if (!(mu >= 0.0 && mu < 1.0)) throw ConfigError("mu must lie in [0, 1)");
  if (!(lr_scale > 0.0) || !std::isfinite(lr_scale)) {
    throw ConfigError("lr_scale must be finite and > 0");
  }
  const std::size_t k = resolved_batch_size(n);
  if (k < 1 || k > n) {
    throw ConfigError("batch size must lie in [1, n], got " + std::to_string(k));
  }
  if (resolved_steps(n) < 1) throw ConfigError("the chain needs at least one step");
  if (!frozen.empty() && static_cast<int>(frozen.size()) != dim) {
    throw ConfigError("frozen mask has the wrong length");
  }
}

ChainState ChainState::initial(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 1};
}

double step_size(std::size_t step, double tau, double lr_scale) {
  return lr_scale * std::pow(static_cast<double>(step), -tau);
}

std::size_t steps_per_epoch(std::size_t n) {
  if (n == 0) throw EmptyDatasetError("an epoch needs n >= 1");
  return n;
}

Eigen::VectorXd minibatch_gradient(const Eigen::VectorXd& f,
                                   const SurvivalDataset& ds,
                                   const SplineBasis& basis,
                                   const SanitizerConfig& sanitizer,
                                   double epsilon,
                                   const std::vector<std::size_t>& batch,
                                   LinkFunction link) {
  sanitizer.validate();
  check_epsilon(epsilon);
  check_dim(f, basis, ds);
  if (batch.empty()) throw ConfigError("minibatch must not be empty");
  for (std::size_t idx : batch) {
    if (idx >= ds.size()) throw BoundsError("minibatch index out of range");
  }
  GradientWorkspace work(basis, ds.p(), link);
  Eigen::VectorXd out;
  work.compute(f, ds, sanitizer, epsilon, batch, out);
  return out;
}

void apply_psgld_update(ChainState& state, const Eigen::VectorXd& gbar,
                        std::size_t n, const PsgldConfig& cfg,
                        const Eigen::VectorXd& normals) {
  const Eigen::Index dim = state.f.size();
  if (gbar.size() != dim || normals.size() != dim || state.V.size() != dim) {
    throw ShapeError("chain update vectors have mismatched lengths");
  }
  const double eps_t = step_size(state.step, cfg.tau, cfg.lr_scale);
  const double nd = static_cast<double>(n);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!cfg.frozen.empty() && cfg.frozen[static_cast<std::size_t>(i)]) continue;
    state.V[i] = cfg.mu * state.V[i] + (1.0 - cfg.mu) * gbar[i] * gbar[i];
    const double g = 1.0 / (cfg.lambda_pc + std::sqrt(state.V[i]));
    state.f[i] += -0.5 * eps_t * g * nd * gbar[i] + std::sqrt(eps_t * g) * normals[i];
  }
  if (!state.f.allFinite() || !state.V.allFinite()) {
    throw ChainError("chain state became non-finite", state.step);
  }
  ++state.step;
}

void psgld_step(ChainState& state, const SurvivalDataset& ds,
                const SplineBasis& basis, const SanitizerConfig& sanitizer,
                const PsgldConfig& cfg, double epsilon, Rng& rng) {
  const std::size_t k = cfg.resolved_batch_size(ds.size());
  std::vector<std::size_t> batch(k);
  for (std::size_t& idx : batch) idx = rng.uniform_index(ds.size());
  const Eigen::VectorXd gbar =
      minibatch_gradient(state.f, ds, basis, sanitizer, epsilon, batch, cfg.link);
  Eigen::VectorXd normals(state.f.size());
  for (Eigen::Index i = 0; i < normals.size(); ++i) normals[i] = rng.normal();
  apply_psgld_update(state, gbar, ds.size(), cfg, normals);
}

FitResult fit_sampled(const SurvivalDataset& ds, const SplineBasis& basis,
                      double epsilon, const SanitizerConfig& sanitizer,
                      const PsgldConfig& cfg, const ChainObserver& observer) {
  check_epsilon(epsilon);
  sanitizer.validate();
  if (ds.q() != basis.num_intervals()) {
    throw ShapeError("dataset q does not match the spline basis");
  }
  const int dim = basis.num_knots() + ds.p();
  cfg.validate(ds.size(), dim);

  const std::size_t n = ds.size();
  const std::size_t k = cfg.resolved_batch_size(n);
  const std::size_t total = cfg.resolved_steps(n);

  Rng rng(cfg.seed);
  GradientWorkspace work(basis, ds.p(), cfg.link);
  ChainState state = ChainState::initial(dim);
  std::vector<std::size_t> batch(k);
  Eigen::VectorXd gbar(dim);
  Eigen::VectorXd normals(dim);

  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t& idx : batch) idx = rng.uniform_index(n);
    work.compute(state.f, ds, sanitizer, epsilon, batch, gbar);
    for (int i = 0; i < dim; ++i) normals[i] = rng.normal();
    apply_psgld_update(state, gbar, n, cfg, normals);
    if (observer) observer(state);
  }

  FitResult fit;
  fit.mechanism = Mechanism::Sampler;
  fit.params = ModelParams::split(state.f, basis.num_knots());
  fit.e = basis.num_knots();
  fit.q = basis.num_intervals();
  fit.p = ds.p();
  fit.n = n;
  fit.link = cfg.link;
  fit.epsilon = epsilon;
  fit.seed = cfg.seed;
  fit.normalization = ds.normalization();

  SamplerSummary summary;
  summary.steps = total;
  summary.batch_size = k;
  summary.v = sanitizer.v;
  summary.sigma = sanitizer.sigma;
  summary.tau = cfg.tau;
  summary.lambda_pc = cfg.lambda_pc;
  summary.mu = cfg.mu;
  summary.lr_scale = cfg.lr_scale;
  summary.burn_in = cfg.burn_in;
  fit.sampler = summary;
  return fit;
}

}  // namespace dpsurv
