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

#ifndef DPSURV_FIT_RESULT_HPP_
#define DPSURV_FIT_RESULT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/model.hpp"
#include "json.hpp"

namespace dpsurv {

enum class Mechanism { None, OutPert, ObjPert, Sampler };

std::string_view to_string(Mechanism mechanism);
// Accepts "none", "out_pert", "obj_pert", "sampler".
Mechanism parse_mechanism(std::string_view name);

struct OptimizerSummary {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

struct SamplerSummary {
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  double v = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  double lambda_pc = 0.0;
  double mu = 0.0;
  double lr_scale = 1.0;
  std::size_t burn_in = 0;
  // The chain only approximates the target density, so the released point
  // carries the privacy guarantee approximately.
  bool approximate_dp = true;
  // Set when a diagnostic trace was recorded; the trace itself is not a
  // private release.
  bool trace_recorded = false;
};

struct FitResult {
  Mechanism mechanism = Mechanism::None;
  ModelParams params;
  int e = 0;
  int q = 0;
  int p = 0;
  std::size_t n = 0;
  LinkFunction link = LinkFunction::Logit;

  std::optional<double> objective_value;
  std::optional<double> epsilon;
  std::optional<double> epsilon_prime;
  std::optional<double> lambda;
  std::optional<double> delta;
  std::optional<double> sensitivity_t;
  std::optional<std::uint64_t> seed;
  std::optional<OptimizerSummary> optimizer;
  std::optional<SamplerSummary> sampler;
  std::optional<NormalizationReport> normalization;

  // The drawn perturbation vector b. In-memory only: it is never written by
  // to_json(), since b together with the output reveals the data gradient.
  Eigen::VectorXd noise;

  Eigen::VectorXd stacked() const { return params.stacked(); }
};

nlohmann::json to_json(const NormalizationReport& report);
NormalizationReport normalization_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& fit);
// Throws SchemaError when a required field is missing or mistyped.
FitResult fit_result_from_json(const nlohmann::json& j);

}  // namespace dpsurv

#endif  // DPSURV_FIT_RESULT_HPP_
