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

// Privacy-utility sweep: runs mechanisms over a grid of budgets and seeds
// and summarizes MRE against a fixed reference fit.

#ifndef DPSURV_SWEEP_HPP_
#define DPSURV_SWEEP_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/fit_result.hpp"
#include "dpsurv/optim.hpp"
#include "dpsurv/sampler.hpp"
#include "dpsurv/spline.hpp"

namespace dpsurv {

inline const std::vector<double> kDefaultSweepEpsilons = {0.1, 0.2, 0.4, 0.8,
                                                          1.6, 3.2, 6.4};

struct SweepArm {
  Mechanism mechanism = Mechanism::OutPert;
  double lambda = 0.0;  // perturbation mechanisms only
};

struct SweepConfig {
  std::vector<double> epsilons = kDefaultSweepEpsilons;
  std::vector<SweepArm> arms;
  std::size_t seeds = 20;
  std::uint64_t base_seed = 0;
  OptimSettings optim;
  // Sampler settings; v and sigma default per epsilon when unset.
  PsgldConfig psgld;
  std::optional<double> v;
  std::optional<double> sigma;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  double epsilon = 0.0;
  Mechanism mechanism = Mechanism::OutPert;
  double lambda = 0.0;
  double mre_mean = 0.0;
  double mre_std = 0.0;  // sample standard deviation over seeds
  double mre_median = 0.0;
  std::size_t runs = 0;
};

// Seed used for run `seed_index` of every (arm, epsilon) cell. Cells share
// seeds, so noise draws are paired across budgets.
std::uint64_t sweep_seed(std::uint64_t base_seed, std::size_t seed_index);

// One row per (arm, epsilon), arms in the given order. MRE is measured
// against `reference` (stacked [alpha; beta]).
std::vector<SweepRow> run_sweep(const SurvivalDataset& ds, const SplineBasis& basis,
                                const Eigen::VectorXd& reference,
                                const SweepConfig& cfg);

// Columns epsilon, mechanism, lambda, mre_mean, mre_std, mre_median, runs.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace dpsurv

#endif  // DPSURV_SWEEP_HPP_
