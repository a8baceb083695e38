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

#include "dpsurv/fit_result.hpp"

#include <string>
#include <vector>

#include "dpsurv/errors.hpp"

namespace dpsurv {
namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw SchemaError(std::string("missing array field '") + key + "'");
  }
  const json& arr = j.at(key);
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw SchemaError(std::string("field '") + key + "' must hold numbers");
    }
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T required_field(const json& j, const char* key) {
  auto value = optional_field<T>(j, key);
  if (!value) throw SchemaError(std::string("missing field '") + key + "'");
  return *value;
}

}  // namespace

std::string_view to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::None:
      return "none";
    case Mechanism::OutPert:
      return "out_pert";
    case Mechanism::ObjPert:
      return "obj_pert";
    case Mechanism::Sampler:
      return "sampler";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "none") return Mechanism::None;
  if (name == "out_pert") return Mechanism::OutPert;
  if (name == "obj_pert") return Mechanism::ObjPert;
  if (name == "sampler") return Mechanism::Sampler;
  throw ConfigError("unknown mechanism '" + std::string(name) + "'");
}

json to_json(const NormalizationReport& report) {
  return json{{"time_scale", report.time_scale},
              {"covariate_means", report.covariate_means},
              {"covariate_scale", report.covariate_scale}};
}

NormalizationReport normalization_from_json(const json& j) {
  NormalizationReport report;
  report.time_scale = required_field<double>(j, "time_scale");
  report.covariate_means = required_field<std::vector<double>>(j, "covariate_means");
  report.covariate_scale = required_field<double>(j, "covariate_scale");
  return report;
}

json to_json(const FitResult& fit) {
  json j;
  j["mechanism"] = std::string(to_string(fit.mechanism));
  j["link"] = std::string(to_string(fit.link));
  j["e"] = fit.e;
  j["q"] = fit.q;
  j["p"] = fit.p;
  j["n"] = fit.n;
  j["alpha"] = vector_json(fit.params.alpha);
  j["beta"] = vector_json(fit.params.beta);
  if (fit.objective_value) j["objective_value"] = *fit.objective_value;
  if (fit.epsilon) j["epsilon"] = *fit.epsilon;
  if (fit.epsilon_prime) j["epsilon_prime"] = *fit.epsilon_prime;
  if (fit.lambda) j["lambda"] = *fit.lambda;
  if (fit.delta) j["delta"] = *fit.delta;
  if (fit.sensitivity_t) j["sensitivity_t"] = *fit.sensitivity_t;
  if (fit.seed) j["seed"] = *fit.seed;
  if (fit.optimizer) {
    j["optimizer"] = json{{"iterations", fit.optimizer->iterations},
                          {"grad_norm", fit.optimizer->grad_norm},
                          {"converged", fit.optimizer->converged}};
  }
  if (fit.sampler) {
    const SamplerSummary& s = *fit.sampler;
    j["sampler"] = json{{"steps", s.steps},         {"batch_size", s.batch_size},
                        {"v", s.v},                 {"sigma", s.sigma},
                        {"tau", s.tau},             {"lambda_pc", s.lambda_pc},
                        {"mu", s.mu},               {"lr_scale", s.lr_scale},
                        {"burn_in", s.burn_in},     {"approximate_dp", s.approximate_dp},
                        {"trace_recorded", s.trace_recorded}};
  }
  if (fit.normalization) j["normalization"] = to_json(*fit.normalization);
  return j;
}

FitResult fit_result_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("fit result must be a JSON object");
  FitResult fit;
  fit.mechanism = parse_mechanism(required_field<std::string>(j, "mechanism"));
  if (auto link = optional_field<std::string>(j, "link")) fit.link = parse_link(*link);
  fit.params.alpha = vector_from_json(j, "alpha");
  fit.params.beta = vector_from_json(j, "beta");
  fit.e = optional_field<int>(j, "e").value_or(static_cast<int>(fit.params.alpha.size()));
  fit.p = optional_field<int>(j, "p").value_or(static_cast<int>(fit.params.beta.size()));
  fit.q = optional_field<int>(j, "q").value_or(0);
  fit.n = optional_field<std::size_t>(j, "n").value_or(0);
  fit.objective_value = optional_field<double>(j, "objective_value");
  fit.epsilon = optional_field<double>(j, "epsilon");
  fit.epsilon_prime = optional_field<double>(j, "epsilon_prime");
  fit.lambda = optional_field<double>(j, "lambda");
  fit.delta = optional_field<double>(j, "delta");
  fit.sensitivity_t = optional_field<double>(j, "sensitivity_t");
  fit.seed = optional_field<std::uint64_t>(j, "seed");
  if (j.contains("optimizer") && j.at("optimizer").is_object()) {
    const json& o = j.at("optimizer");
    fit.optimizer = OptimizerSummary{required_field<int>(o, "iterations"),
                                     required_field<double>(o, "grad_norm"),
                                     optional_field<bool>(o, "converged").value_or(true)};
  }
  if (j.contains("sampler") && j.at("sampler").is_object()) {
    const json& s = j.at("sampler");
    SamplerSummary summary;
    summary.steps = required_field<std::size_t>(s, "steps");
    summary.batch_size = required_field<std::size_t>(s, "batch_size");
    summary.v = required_field<double>(s, "v");
    summary.sigma = required_field<double>(s, "sigma");
    summary.tau = required_field<double>(s, "tau");
    summary.lambda_pc = required_field<double>(s, "lambda_pc");
    summary.mu = required_field<double>(s, "mu");
    summary.lr_scale = optional_field<double>(s, "lr_scale").value_or(1.0);
    summary.burn_in = optional_field<std::size_t>(s, "burn_in").value_or(0);
    summary.approximate_dp = optional_field<bool>(s, "approximate_dp").value_or(true);
    summary.trace_recorded = optional_field<bool>(s, "trace_recorded").value_or(false);
    fit.sampler = summary;
  }
  if (j.contains("normalization") && j.at("normalization").is_object()) {
    fit.normalization = normalization_from_json(j.at("normalization"));
  }
  return fit;
}

}  // namespace dpsurv
