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

#include <string>

#include "doctest.h"
#include "dpsurv/errors.hpp"
#include "dpsurv/fit_result.hpp"
#include "support.hpp"

using namespace dpsurv;

namespace {

FitResult sample_fit() {
  testing::Gen gen(51);
  FitResult fit;
  fit.mechanism = Mechanism::ObjPert;
  fit.params = ModelParams::split(gen.vector(5), 3);
  fit.e = 3;
  fit.q = 20;
  fit.p = 2;
  fit.n = 500;
  fit.objective_value = 0.6931471805599453;
  fit.epsilon = 1.6;
  fit.epsilon_prime = 1.2;
  fit.lambda = 0.01;
  fit.delta = 0.003;
  fit.sensitivity_t = 71.25;
  fit.seed = 18446744073709551615ULL;
  fit.optimizer = OptimizerSummary{17, 3e-9, true};
  fit.normalization = NormalizationReport{2.5, {0.1, -0.2}, 3.0};
  fit.noise = gen.vector(5);
  return fit;
}

}  // namespace

TEST_CASE("fit results survive a JSON round trip") {
  const FitResult fit = sample_fit();
  const std::string text = to_json(fit).dump();
  const FitResult back = fit_result_from_json(nlohmann::json::parse(text));
  CHECK(back.mechanism == fit.mechanism);
  CHECK(back.params.alpha == fit.params.alpha);
  CHECK(back.params.beta == fit.params.beta);
  CHECK(back.e == 3);
  CHECK(back.q == 20);
  CHECK(back.p == 2);
  CHECK(back.n == 500);
  CHECK(back.epsilon == fit.epsilon);
  CHECK(back.epsilon_prime == fit.epsilon_prime);
  CHECK(back.lambda == fit.lambda);
  CHECK(back.delta == fit.delta);
  CHECK(back.sensitivity_t == fit.sensitivity_t);
  CHECK(back.seed == fit.seed);
  CHECK(back.objective_value == fit.objective_value);
  REQUIRE(back.optimizer);
  CHECK(back.optimizer->iterations == 17);
  CHECK(back.normalization == fit.normalization);
}

TEST_CASE("the drawn noise vector is never serialized") {
  const nlohmann::json j = to_json(sample_fit());
  CHECK_FALSE(j.contains("noise"));
  CHECK_FALSE(j.contains("b"));
}

TEST_CASE("a non-private fit carries no privacy metadata") {
  FitResult fit;
  fit.params = ModelParams::split(Eigen::VectorXd::Ones(4), 3);
  const nlohmann::json j = to_json(fit);
  CHECK(j["mechanism"] == "none");
  for (const char* key : {"epsilon", "epsilon_prime", "delta", "sensitivity_t", "seed", "sampler"}) {
    CHECK_FALSE(j.contains(key));
  }
}

TEST_CASE("sampler summaries mark the release as approximately private") {
  FitResult fit;
  fit.mechanism = Mechanism::Sampler;
  fit.params = ModelParams::split(Eigen::VectorXd::Ones(4), 3);
  fit.sampler = SamplerSummary{};
  const nlohmann::json j = to_json(fit);
  CHECK(j["sampler"]["approximate_dp"] == true);
  CHECK(fit_result_from_json(j).sampler->approximate_dp);
}

TEST_CASE("malformed fit JSON is a schema error") {
  nlohmann::json j = to_json(sample_fit());
  j.erase("alpha");
  CHECK_THROWS_AS(fit_result_from_json(j), SchemaError);
  j = to_json(sample_fit());
  j["beta"] = "not a vector";
  CHECK_THROWS_AS(fit_result_from_json(j), SchemaError);
  CHECK_THROWS_AS(fit_result_from_json(nlohmann::json::array()), SchemaError);
  j = to_json(sample_fit());
  j["mechanism"] = "laplace";
  CHECK_THROWS_AS(fit_result_from_json(j), ConfigError);
}

TEST_CASE("mechanism names round trip") {
  for (Mechanism m : {Mechanism::None, Mechanism::OutPert, Mechanism::ObjPert, Mechanism::Sampler}) {
    CHECK(parse_mechanism(to_string(m)) == m);
  }
}
