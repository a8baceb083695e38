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

#include "dpsurv/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "dpsurv/errors.hpp"
#include "dpsurv/eval.hpp"
#include "dpsurv/mechanisms.hpp"
#include "dpsurv/noise.hpp"

namespace dpsurv {
namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Eigen::VectorXd run_one(const SurvivalDataset& ds, const SplineBasis& basis,
                        const SweepConfig& cfg, const SweepArm& arm,
                        double epsilon, std::uint64_t seed) {
  switch (arm.mechanism) {
    case Mechanism::OutPert:
    case Mechanism::ObjPert: {
      PerturbationConfig pc;
      pc.epsilon = epsilon;
      pc.lambda = arm.lambda;
      pc.seed = seed;
      pc.optim = cfg.optim;
      return arm.mechanism == Mechanism::OutPert ? fit_out_pert(ds, basis, pc).stacked()
                                                 : fit_obj_pert(ds, basis, pc).stacked();
    }
    case Mechanism::Sampler: {
      SanitizerConfig sc = SanitizerConfig::defaults(ds.size(), epsilon);
      if (cfg.v) {
        sc.v = *cfg.v;
        sc.sigma = 1e-2 * 2.0 * sc.v / epsilon;
      }
      if (cfg.sigma) sc.sigma = *cfg.sigma;
      PsgldConfig pc = cfg.psgld;
      pc.seed = seed;
      return fit_sampled(ds, basis, epsilon, sc, pc).stacked();
    }
    case Mechanism::None:
      break;
  }
  throw ConfigError("a sweep arm needs a private mechanism");
}

}  // namespace

std::uint64_t sweep_seed(std::uint64_t base_seed, std::size_t seed_index) {
  return derive_seed(base_seed, seed_index);
}

std::vector<SweepRow> run_sweep(const SurvivalDataset& ds, const SplineBasis& basis,
                                const Eigen::VectorXd& reference,
                                const SweepConfig& cfg) {
  if (cfg.epsilons.empty() || cfg.arms.empty() || cfg.seeds == 0) {
    throw ConfigError("sweep needs at least one epsilon, arm and seed");
  }
  for (double eps : cfg.epsilons) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("sweep epsilons must be > 0");
  }
  for (const SweepArm& arm : cfg.arms) {
    if (arm.mechanism == Mechanism::None) {
      throw ConfigError("a sweep arm needs a private mechanism");
    }
  }
  if (reference.size() != basis.num_knots() + ds.p()) {
    throw ShapeError("reference has the wrong length");
  }

  const std::size_t cells = cfg.arms.size() * cfg.epsilons.size();
  const std::size_t tasks = cells * cfg.seeds;
  std::vector<double> errors(tasks, 0.0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (std::size_t task = next++; task < tasks && !failed; task = next++) {
      const std::size_t cell = task / cfg.seeds;
      const std::size_t seed_index = task % cfg.seeds;
      const SweepArm& arm = cfg.arms[cell / cfg.epsilons.size()];
      const double eps = cfg.epsilons[cell % cfg.epsilons.size()];
      try {
        const Eigen::VectorXd f =
            run_one(ds, basis, cfg, arm, eps, sweep_seed(cfg.base_seed, seed_index));
        const Eigen::VectorXd one[] = {f};
        errors[task] = mre(one, reference);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows;
  rows.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const SweepArm& arm = cfg.arms[cell / cfg.epsilons.size()];
    std::vector<double> values(errors.begin() + static_cast<std::ptrdiff_t>(cell * cfg.seeds),
                               errors.begin() + static_cast<std::ptrdiff_t>((cell + 1) * cfg.seeds));
    SweepRow row;
    row.epsilon = cfg.epsilons[cell % cfg.epsilons.size()];
    row.mechanism = arm.mechanism;
    row.lambda = arm.mechanism == Mechanism::Sampler ? 0.0 : arm.lambda;
    row.runs = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mre_mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - row.mre_mean) * (v - row.mre_mean);
    row.mre_std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    row.mre_median = median(std::move(values));
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const auto old_precision = out.precision(10);
  out << "epsilon,mechanism,lambda,mre_mean,mre_std,mre_median,runs\n";
  for (const SweepRow& row : rows) {
    out << row.epsilon << ',' << to_string(row.mechanism) << ',' << row.lambda << ','
        << row.mre_mean << ',' << row.mre_std << ',' << row.mre_median << ','
        << row.runs << '\n';
  }
  out.precision(old_precision);
}

}  // namespace dpsurv
