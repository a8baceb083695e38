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

#include <sstream>
#include <string>

#include "doctest.h"
#include "dpsurv/errors.hpp"
#include "dpsurv/mechanisms.hpp"
#include "dpsurv/sweep.hpp"
#include "support.hpp"

using namespace dpsurv;

namespace {

struct Fixture {
  SplineBasis basis = build_basis(3, 5);
  SurvivalDataset ds = testing::Gen(111).dataset(60, 2, 5);
  Eigen::VectorXd reference = fit_nonprivate(ds, basis, 0.0).stacked();
};

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.arms = {{Mechanism::OutPert, 0.1}, {Mechanism::ObjPert, 0.1}, {Mechanism::Sampler, 0.0}};
  cfg.seeds = 5;
  cfg.base_seed = 3;
  cfg.psgld.steps = 300;
  cfg.psgld.lr_scale = 1e-2;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("a default sweep has seven rows per mechanism") {
  const Fixture fx;
  const auto rows = run_sweep(fx.ds, fx.basis, fx.reference, small_config());
  REQUIRE(rows.size() == 21);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].epsilon == kDefaultSweepEpsilons[i % 7]);
    CHECK(rows[i].runs == 5);
    CHECK(rows[i].mre_mean >= 0.0);
    CHECK(rows[i].mre_std >= 0.0);
  }
  CHECK(rows[0].mechanism == Mechanism::OutPert);
  CHECK(rows[7].mechanism == Mechanism::ObjPert);
  CHECK(rows[14].mechanism == Mechanism::Sampler);
  CHECK(rows[14].lambda == 0.0);
}

TEST_CASE("sweep rows match fits run by hand") {
  const Fixture fx;
  SweepConfig cfg = small_config();
  cfg.arms = {{Mechanism::OutPert, 0.1}};
  cfg.epsilons = {0.5};
  const auto rows = run_sweep(fx.ds, fx.basis, fx.reference, cfg);
  double sum = 0.0;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    PerturbationConfig pc;
    pc.epsilon = 0.5;
    pc.lambda = 0.1;
    pc.seed = sweep_seed(cfg.base_seed, s);
    const Eigen::VectorXd f = fit_out_pert(fx.ds, fx.basis, pc).stacked();
    sum += (f - fx.reference).norm() / fx.reference.norm();
  }
  CHECK(rows.at(0).mre_mean == doctest::Approx(sum / 5).epsilon(1e-12));
}

TEST_CASE("sweeps are deterministic whatever the thread count") {
  const Fixture fx;
  SweepConfig cfg = small_config();
  cfg.threads = 1;
  const auto a = run_sweep(fx.ds, fx.basis, fx.reference, cfg);
  cfg.threads = 3;
  const auto b = run_sweep(fx.ds, fx.basis, fx.reference, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mre_mean == b[i].mre_mean);
    CHECK(a[i].mre_median == b[i].mre_median);
  }
}

TEST_CASE("sweep CSV layout") {
  const Fixture fx;
  SweepConfig cfg = small_config();
  cfg.arms = {{Mechanism::OutPert, 0.1}};
  std::ostringstream out;
  write_sweep_csv(out, run_sweep(fx.ds, fx.basis, fx.reference, cfg));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epsilon,mechanism,lambda,mre_mean,mre_std,mre_median,runs");
  std::getline(in, line);
  CHECK(line.rfind("0.1,out_pert,0.1,", 0) == 0);
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 7);
}

TEST_CASE("invalid sweeps") {
  const Fixture fx;
  SweepConfig cfg = small_config();
  cfg.arms = {};
  CHECK_THROWS_AS(run_sweep(fx.ds, fx.basis, fx.reference, cfg), ConfigError);
  cfg = small_config();
  cfg.epsilons = {0.0};
  CHECK_THROWS_AS(run_sweep(fx.ds, fx.basis, fx.reference, cfg), ConfigError);
  cfg = small_config();
  cfg.arms = {{Mechanism::None, 0.0}};
  CHECK_THROWS_AS(run_sweep(fx.ds, fx.basis, fx.reference, cfg), ConfigError);
  cfg = small_config();
  CHECK_THROWS_AS(run_sweep(fx.ds, fx.basis, Eigen::VectorXd::Ones(2), cfg), ShapeError);
}
