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

// Sanitized-loss exponential mechanism, sampled approximately with
// preconditioned SGLD.
//
// Each record loss is passed through C_v(x) = v tanh(x / v), which caps it at
// v, so the utility
//
//   U(f; D) = -(sigma/2) ||f||^2 - sum_i C_v(l(f; d_i))
//
// changes by at most v between neighboring datasets. The target density is
// exp((epsilon / 2v) U(f; D)). The chain only approaches that density, so
// the released final state is private only approximately.

#ifndef DPSURV_SAMPLER_HPP_
#define DPSURV_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/fit_result.hpp"
#include "dpsurv/model.hpp"
#include "dpsurv/noise.hpp"
#include "dpsurv/spline.hpp"

namespace dpsurv {

struct SanitizerConfig {
  double v = 1.0;      // loss cap
  double sigma = 0.0;  // prior precision

  // v = 2 log n, sigma = 1e-2 * 2v / epsilon. n must be >= 2.
  static SanitizerConfig defaults(std::size_t n, double epsilon);
  void validate() const;
};

// C_v(x) = v tanh(x / v).
double sanitize(double x, double v);
// 1 - tanh^2(x / v); decays smoothly to 0 for large |x / v|.
double sanitize_deriv(double x, double v);

// U(f; D). Throws ShapeError when f has the wrong length.
double utility(const Eigen::VectorXd& f, const SurvivalDataset& ds,
               const SplineBasis& basis, const SanitizerConfig& cfg,
               LinkFunction link = LinkFunction::Logit);
// U(f; D) and its gradient.
double utility_value_grad(const Eigen::VectorXd& f, const SurvivalDataset& ds,
                          const SplineBasis& basis, const SanitizerConfig& cfg,
                          Eigen::VectorXd& grad,
                          LinkFunction link = LinkFunction::Logit);

struct PsgldConfig {
  std::optional<std::size_t> steps;       // default 250 n
  std::optional<std::size_t> batch_size;  // default min(200, n)
  double tau = 0.51;
  double lambda_pc = 1e-5;
  double mu = 0.99;
  double lr_scale = 1.0;
  // Steps that diagnostics (traces, per-epoch summaries) should discard.
  // The chain itself always runs from step 1.
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 0;
  LinkFunction link = LinkFunction::Logit;
  // Coordinates with a nonzero entry are held at their starting value of 0.
  // Empty means every coordinate moves.
  std::vector<char> frozen;

  std::size_t resolved_steps(std::size_t n) const;
  std::size_t resolved_batch_size(std::size_t n) const;
  void validate(std::size_t n, int dim) const;
};

struct ChainState {
  Eigen::VectorXd f;
  Eigen::VectorXd V;       // moving average of squared gradients
  std::size_t step = 1;    // index of the next update, starting at 1

  static ChainState initial(int dim);
};

// Step size lr_scale * step^(-tau).
double step_size(std::size_t step, double tau, double lr_scale = 1.0);

// An epoch is n steps, whatever the batch size.
std::size_t steps_per_epoch(std::size_t n);

// The minibatch gradient
//   g = (epsilon / 2v) (sigma f / n + (1/k) sum_{d in batch} C_v'(l) grad l),
// an estimate of -(epsilon / 2v) grad U / n.
Eigen::VectorXd minibatch_gradient(const Eigen::VectorXd& f,
                                   const SurvivalDataset& ds,
                                   const SplineBasis& basis,
                                   const SanitizerConfig& sanitizer,
                                   double epsilon,
                                   const std::vector<std::size_t>& batch,
                                   LinkFunction link = LinkFunction::Logit);

// Applies one update given a gradient estimate `gbar` and a vector of
// standard normals:
//   V <- mu V + (1 - mu) gbar^2,  G = 1 / (lambda_pc + sqrt(V)),
//   f <- f - (eps_t / 2) G * (n gbar) + sqrt(eps_t G) * normals,
// then advances the step counter. Frozen coordinates are left alone. Throws
// ChainError if the new state is not finite.
void apply_psgld_update(ChainState& state, const Eigen::VectorXd& gbar,
                        std::size_t n, const PsgldConfig& cfg,
                        const Eigen::VectorXd& normals);

// Draws a minibatch (uniform, with replacement), computes its gradient and
// applies one update.
void psgld_step(ChainState& state, const SurvivalDataset& ds,
                const SplineBasis& basis, const SanitizerConfig& sanitizer,
                const PsgldConfig& cfg, double epsilon, Rng& rng);

// Called after every update with the new state.
using ChainObserver = std::function<void(const ChainState&)>;

// Runs the chain from f = 0, V = 0 and releases the final state. Anything the
// observer sees besides the final state is diagnostic and not private.
FitResult fit_sampled(const SurvivalDataset& ds, const SplineBasis& basis,
                      double epsilon, const SanitizerConfig& sanitizer,
                      const PsgldConfig& cfg,
                      const ChainObserver& observer = {});

}  // namespace dpsurv

#endif  // DPSURV_SAMPLER_HPP_
