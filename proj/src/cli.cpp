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

#include "dpsurv/cli.hpp"

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpsurv/dataset.hpp"
#include "dpsurv/errors.hpp"
#include "dpsurv/eval.hpp"
#include "dpsurv/fit_result.hpp"
#include "dpsurv/mechanisms.hpp"
#include "dpsurv/model.hpp"
#include "dpsurv/noise.hpp"
#include "dpsurv/sampler.hpp"
#include "dpsurv/spline.hpp"
#include "dpsurv/sweep.hpp"
#include "json.hpp"

namespace dpsurv {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Seeds drawn from the OS are cut to 53 bits so any JSON reader can hold
// the recorded value exactly.
constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

std::uint64_t fresh_seed() { return entropy_seed() & kSeedMask; }

// Settings shared by fit and eval --sweep. Every field is optional so that
// values from --config and from flags can be layered.
struct RunSettings {
  std::optional<std::string> mechanism;
  std::optional<double> epsilon;
  std::optional<double> lambda;
  std::optional<int> q;
  std::optional<int> e;
  std::optional<std::string> link;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<bool> normalize;
  std::optional<std::string> time_column;
  std::optional<std::string> event_column;
  std::optional<std::vector<std::string>> covariates;
  std::optional<double> grad_tol;
  std::optional<int> max_iters;
  // Sampler.
  std::optional<double> v;
  std::optional<double> sigma;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> batch_size;
  std::optional<double> tau;
  std::optional<double> lambda_pc;
  std::optional<double> mu;
  std::optional<double> lr_scale;
  std::optional<std::size_t> burn_in;
  std::optional<std::string> trace;
  std::optional<std::size_t> trace_every;
  // sensitivity.
  std::optional<std::size_t> n;
  std::optional<std::vector<double>> interval_norms;
  // eval --sweep.
  std::optional<std::vector<double>> epsilons;
  std::optional<std::vector<std::string>> mechanisms;
  std::optional<std::size_t> seeds;
  std::optional<double> reference_lambda;
  std::optional<unsigned> threads;
  std::optional<std::string> sweep_output;
};

template <typename T>
void overlay(std::optional<T>& base, const std::optional<T>& top) {
  if (top) base = top;
}

void overlay(RunSettings& base, const RunSettings& top) {
  overlay(base.mechanism, top.mechanism);
  overlay(base.epsilon, top.epsilon);
  overlay(base.lambda, top.lambda);
  overlay(base.q, top.q);
  overlay(base.e, top.e);
  overlay(base.link, top.link);
  overlay(base.seed, top.seed);
  overlay(base.input, top.input);
  overlay(base.output, top.output);
  overlay(base.normalize, top.normalize);
  overlay(base.time_column, top.time_column);
  overlay(base.event_column, top.event_column);
  overlay(base.covariates, top.covariates);
  overlay(base.grad_tol, top.grad_tol);
  overlay(base.max_iters, top.max_iters);
  overlay(base.v, top.v);
  overlay(base.sigma, top.sigma);
  overlay(base.steps, top.steps);
  overlay(base.batch_size, top.batch_size);
  overlay(base.tau, top.tau);
  overlay(base.lambda_pc, top.lambda_pc);
  overlay(base.mu, top.mu);
  overlay(base.lr_scale, top.lr_scale);
  overlay(base.burn_in, top.burn_in);
  overlay(base.trace, top.trace);
  overlay(base.trace_every, top.trace_every);
  overlay(base.n, top.n);
  overlay(base.interval_norms, top.interval_norms);
  overlay(base.epsilons, top.epsilons);
  overlay(base.mechanisms, top.mechanisms);
  overlay(base.seeds, top.seeds);
  overlay(base.reference_lambda, top.reference_lambda);
  overlay(base.threads, top.threads);
  overlay(base.sweep_output, top.sweep_output);
}

template <typename T>
void read_key(const json& j, const char* key, std::optional<T>& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("malformed ") + what + " '" + path + "': " + ex.what());
  }
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

RunSettings settings_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j,
                      {"mechanism", "epsilon", "lambda", "q", "e", "link", "seed",
                       "input", "output", "normalize", "time_column", "event_column",
                       "covariates", "optim", "sampler", "trace", "trace_every", "n",
                       "interval_norms", "sweep"},
                      "config");
  RunSettings s;
  read_key(j, "mechanism", s.mechanism);
  read_key(j, "epsilon", s.epsilon);
  read_key(j, "lambda", s.lambda);
  read_key(j, "q", s.q);
  read_key(j, "e", s.e);
  read_key(j, "link", s.link);
  read_key(j, "seed", s.seed);
  read_key(j, "input", s.input);
  read_key(j, "output", s.output);
  read_key(j, "normalize", s.normalize);
  read_key(j, "time_column", s.time_column);
  read_key(j, "event_column", s.event_column);
  read_key(j, "covariates", s.covariates);
  read_key(j, "trace", s.trace);
  read_key(j, "trace_every", s.trace_every);
  read_key(j, "n", s.n);
  read_key(j, "interval_norms", s.interval_norms);
  if (j.contains("optim")) {
    const json& o = j.at("optim");
    if (!o.is_object()) throw ConfigError("config field 'optim' must be an object");
    reject_unknown_keys(o, {"grad_tol", "max_iters"}, "config.optim");
    read_key(o, "grad_tol", s.grad_tol);
    read_key(o, "max_iters", s.max_iters);
  }
  if (j.contains("sampler")) {
    const json& o = j.at("sampler");
    if (!o.is_object()) throw ConfigError("config field 'sampler' must be an object");
    reject_unknown_keys(o,
                        {"v", "sigma", "steps", "batch_size", "tau", "lambda_pc", "mu",
                         "lr_scale", "burn_in"},
                        "config.sampler");
    read_key(o, "v", s.v);
    read_key(o, "sigma", s.sigma);
    read_key(o, "steps", s.steps);
    read_key(o, "batch_size", s.batch_size);
    read_key(o, "tau", s.tau);
    read_key(o, "lambda_pc", s.lambda_pc);
    read_key(o, "mu", s.mu);
    read_key(o, "lr_scale", s.lr_scale);
    read_key(o, "burn_in", s.burn_in);
  }
  if (j.contains("sweep")) {
    const json& o = j.at("sweep");
    if (!o.is_object()) throw ConfigError("config field 'sweep' must be an object");
    reject_unknown_keys(o,
                        {"epsilons", "mechanisms", "seeds", "reference_lambda", "threads",
                         "output"},
                        "config.sweep");
    read_key(o, "epsilons", s.epsilons);
    read_key(o, "mechanisms", s.mechanisms);
    read_key(o, "seeds", s.seeds);
    read_key(o, "reference_lambda", s.reference_lambda);
    read_key(o, "threads", s.threads);
    read_key(o, "output", s.sweep_output);
  }
  return s;
}

// Flags registered on a subcommand, plus the config file they override.
struct FlagBinding {
  RunSettings flags;
  std::string config_path;
  bool no_normalize = false;

  RunSettings resolve() const {
    RunSettings s;
    if (!config_path.empty()) s = settings_from_json(read_json_file(config_path, "config"));
    overlay(s, flags);
    if (no_normalize) s.normalize = false;
    return s;
  }
};

void add_data_flags(CLI::App* cmd, FlagBinding& b) {
  cmd->add_option("--config", b.config_path, "JSON config; flags override its values");
  cmd->add_option("--input", b.flags.input, "Input CSV with a header row");
  cmd->add_option("--q", b.flags.q, "Number of discrete time intervals (default 200)");
  cmd->add_option("--e", b.flags.e, "Number of spline knots (default 3)");
  cmd->add_option("--link", b.flags.link, "logit (default), cloglog or probit");
  cmd->add_flag("--no-normalize", b.no_normalize,
                "Use times in [0,1] and covariates in the unit ball as given");
  cmd->add_option("--time-column", b.flags.time_column, "Time column (default 'time')");
  cmd->add_option("--event-column", b.flags.event_column,
                  "Event column, 1 = failure, 0 = censored (default 'event')");
  cmd->add_option("--covariates", b.flags.covariates,
                  "Covariate columns (default: all other columns)");
  cmd->add_option("--grad-tol", b.flags.grad_tol, "Optimizer gradient tolerance");
  cmd->add_option("--max-iters", b.flags.max_iters, "Optimizer iteration cap");
}

void add_sampler_flags(CLI::App* cmd, FlagBinding& b) {
  cmd->add_option("--v", b.flags.v, "Loss cap (default 2 log n)");
  cmd->add_option("--sigma", b.flags.sigma, "Prior precision (default 0.02 v / epsilon)");
  cmd->add_option("--steps", b.flags.steps, "Chain length (default 250 n)");
  cmd->add_option("--batch-size", b.flags.batch_size, "Minibatch size (default min(200, n))");
  cmd->add_option("--tau", b.flags.tau, "Step-size decay exponent (default 0.51)");
  cmd->add_option("--lambda-pc", b.flags.lambda_pc, "Preconditioner floor (default 1e-5)");
  cmd->add_option("--mu", b.flags.mu, "Squared-gradient decay (default 0.99)");
  cmd->add_option("--lr-scale", b.flags.lr_scale, "Step-size multiplier (default 1)");
  cmd->add_option("--burn-in", b.flags.burn_in,
                  "Steps left out of diagnostic traces (default 10000)");
}

OptimSettings optim_settings(const RunSettings& s) {
  OptimSettings o;
  if (s.grad_tol) o.grad_tol = *s.grad_tol;
  if (s.max_iters) o.max_iters = *s.max_iters;
  if (!(o.grad_tol > 0.0)) throw ConfigError("grad_tol must be > 0");
  if (o.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  return o;
}

PsgldConfig psgld_config(const RunSettings& s) {
  PsgldConfig c;
  c.steps = s.steps;
  c.batch_size = s.batch_size;
  if (s.tau) c.tau = *s.tau;
  if (s.lambda_pc) c.lambda_pc = *s.lambda_pc;
  if (s.mu) c.mu = *s.mu;
  if (s.lr_scale) c.lr_scale = *s.lr_scale;
  if (s.burn_in) c.burn_in = *s.burn_in;
  if (s.link) c.link = parse_link(*s.link);
  return c;
}

SanitizerConfig sanitizer_config(const RunSettings& s, std::size_t n, double epsilon) {
  SanitizerConfig c;
  if (s.v) {
    c.v = *s.v;
    c.sigma = 1e-2 * 2.0 * c.v / epsilon;
  } else {
    c = SanitizerConfig::defaults(n, epsilon);
  }
  if (s.sigma) c.sigma = *s.sigma;
  c.validate();
  return c;
}

struct LoadedData {
  SurvivalDataset ds;
  SplineBasis basis;
};

LoadedData load_data(const RunSettings& s) {
  if (!s.input) throw ConfigError("--input is required");
  const int q = s.q.value_or(200);
  const int e = s.e.value_or(3);
  if (q < 1) throw ConfigError("q must be >= 1");
  if (e < 2) throw ConfigError("e must be >= 2");
  CsvSchema schema;
  if (s.time_column) schema.time_column = *s.time_column;
  if (s.event_column) schema.event_column = *s.event_column;
  if (s.covariates) schema.covariate_columns = *s.covariates;
  const std::vector<RawRecord> raw = load_csv(*s.input, schema);
  SurvivalDataset ds = s.normalize.value_or(true) ? normalize(raw, q) : from_normalized(raw, q);
  return {std::move(ds), SplineBasis(e, q)};
}

double require_positive(const std::optional<double>& value, const char* name) {
  if (!value) throw ConfigError(std::string("--") + name + " is required");
  if (!(*value > 0.0) || !std::isfinite(*value)) {
    throw ConfigError(std::string(name) + " must be finite and > 0");
  }
  return *value;
}

// Writes `content` to `path` through a temporary file in the same directory
// and a rename, so readers never see a partial file. "-" writes to `out`.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    out.flush();
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Streams trace rows into a temporary file that is renamed on commit().
class TraceWriter {
 public:
  TraceWriter(const std::string& path, int dim) : target_(path), tmp_(path) {
    tmp_ += ".tmp." + std::to_string(::getpid());
    file_.open(tmp_, std::ios::trunc);
    if (!file_) throw IoError("cannot write trace '" + path + "'");
    file_.precision(17);
    file_ << "step,epoch";
    for (int i = 0; i < dim; ++i) file_ << ",f" << i;
    file_ << '\n';
  }
  ~TraceWriter() {
    if (!committed_) {
      file_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  void row(std::size_t step, std::size_t epoch, const Eigen::VectorXd& f) {
    file_ << step << ',' << epoch;
    for (Eigen::Index i = 0; i < f.size(); ++i) file_ << ',' << f[i];
    file_ << '\n';
  }

  void commit() {
    file_.close();
    if (!file_) throw IoError("failed writing trace '" + target_.string() + "'");
    std::error_code ec;
    fs::rename(tmp_, target_, ec);
    if (ec) throw IoError("cannot move trace into place at '" + target_.string() + "'");
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

int cmd_fit(const FlagBinding& binding, std::ostream& out) {
  const RunSettings s = binding.resolve();
  const Mechanism mechanism = parse_mechanism(s.mechanism.value_or("none"));
  const LinkFunction link = parse_link(s.link.value_or("logit"));
  const OptimSettings optim = optim_settings(s);
  if (s.trace && mechanism != Mechanism::Sampler) {
    throw ConfigError("--trace is only available for the sampler");
  }

  // Check the required numbers before touching the data.
  double epsilon = 0.0;
  double lambda = 0.0;
  if (mechanism == Mechanism::None) {
    lambda = s.lambda.value_or(0.0);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  } else {
    epsilon = require_positive(s.epsilon, "epsilon");
    if (mechanism != Mechanism::Sampler) lambda = require_positive(s.lambda, "lambda");
  }

  const LoadedData data = load_data(s);
  FitResult fit;
  switch (mechanism) {
    case Mechanism::None:
      fit = fit_nonprivate(data.ds, data.basis, lambda, optim, link);
      break;
    case Mechanism::OutPert:
    case Mechanism::ObjPert: {
      PerturbationConfig pc;
      pc.epsilon = epsilon;
      pc.lambda = lambda;
      pc.seed = s.seed.value_or(fresh_seed());
      pc.link = link;
      pc.optim = optim;
      fit = mechanism == Mechanism::OutPert ? fit_out_pert(data.ds, data.basis, pc)
                                            : fit_obj_pert(data.ds, data.basis, pc);
      break;
    }
    case Mechanism::Sampler: {
      const SanitizerConfig sc = sanitizer_config(s, data.ds.size(), epsilon);
      PsgldConfig pc = psgld_config(s);
      pc.seed = s.seed.value_or(fresh_seed());
      std::unique_ptr<TraceWriter> trace;
      ChainObserver observer;
      if (s.trace) {
        const std::size_t every = s.trace_every.value_or(1);
        if (every < 1) throw ConfigError("trace_every must be >= 1");
        trace = std::make_unique<TraceWriter>(*s.trace, data.basis.num_knots() + data.ds.p());
        const std::size_t per_epoch = steps_per_epoch(data.ds.size());
        const std::size_t burn_in = pc.burn_in;
        TraceWriter* writer = trace.get();
        observer = [=](const ChainState& state) {
          const std::size_t done = state.step - 1;
          if (done <= burn_in || done % every != 0) return;
          writer->row(done, (done + per_epoch - 1) / per_epoch, state.f);
        };
      }
      fit = fit_sampled(data.ds, data.basis, epsilon, sc, pc, observer);
      if (trace) {
        trace->commit();
        fit.sampler->trace_recorded = true;
      }
      break;
    }
  }
  write_output(s.output.value_or("-"), dump(to_json(fit)), out);
  return kExitOk;
}

struct SynthFlags {
  std::string spec_path;
  std::string output;
  std::string truth;
  std::optional<std::uint64_t> seed;
};

SynthSpec synth_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  reject_unknown_keys(j,
                      {"n", "p", "q", "e", "true_alpha", "true_beta", "censor_prob", "seed",
                       "link"},
                      "synthetic spec");
  const auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ConfigError(std::string("synthetic spec needs '") + key + "'");
    return j.at(key);
  };
  SynthSpec spec;
  try {
    spec.n = need("n").get<std::size_t>();
    spec.p = need("p").get<int>();
    spec.q = need("q").get<int>();
    spec.e = need("e").get<int>();
    const auto alpha = need("true_alpha").get<std::vector<double>>();
    const auto beta = need("true_beta").get<std::vector<double>>();
    spec.true_alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(),
                                                        static_cast<Eigen::Index>(alpha.size()));
    spec.true_beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                       static_cast<Eigen::Index>(beta.size()));
    spec.censor_prob = j.value("censor_prob", 0.0);
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("link")) spec.link = parse_link(j.at("link").get<std::string>());
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("synthetic spec has a field of the wrong type: ") + ex.what());
  }
  return spec;
}

int cmd_synth(const SynthFlags& flags, std::ostream& out) {
  const json j = read_json_file(flags.spec_path, "synthetic spec");
  SynthSpec spec = synth_spec_from_json(j);
  if (flags.seed) {
    spec.seed = *flags.seed;
  } else if (!j.contains("seed")) {
    spec.seed = fresh_seed();
  }
  spec.validate();
  const SplineBasis basis(spec.e, spec.q);
  const SurvivalDataset ds = generate_synthetic(spec, basis);

  std::vector<std::string> names;
  for (int i = 0; i < spec.p; ++i) names.push_back("x" + std::to_string(i + 1));
  std::ostringstream csv;
  const std::vector<RawRecord> raw = to_raw_records(ds);
  write_csv(csv, raw, names);

  const json truth = {
      {"kind", "synthetic_truth"},
      {"alpha", std::vector<double>(spec.true_alpha.data(),
                                    spec.true_alpha.data() + spec.true_alpha.size())},
      {"beta", std::vector<double>(spec.true_beta.data(),
                                   spec.true_beta.data() + spec.true_beta.size())},
      {"n", spec.n},
      {"p", spec.p},
      {"q", spec.q},
      {"e", spec.e},
      {"censor_prob", spec.censor_prob},
      {"seed", spec.seed},
      {"link", std::string(to_string(spec.link))},
      {"time_encoding", "interval_midpoint"}};

  write_output(flags.output, csv.str(), out);
  write_output(flags.truth, dump(truth), out);
  return kExitOk;
}

struct EvalFlags {
  FlagBinding binding;
  std::string reference;
  std::vector<std::string> fits;
  bool sweep = false;
};

struct Reference {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
};

Eigen::VectorXd json_vector(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    throw SchemaError("'" + path + "' has no array field '" + key + "'");
  }
  std::vector<double> values;
  try {
    values = j.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw SchemaError("'" + path + "': field '" + key + "' must hold numbers");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

json summary_json(std::vector<double> values) {
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  const double median =
      values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return {{"mean", mean},
          {"std", values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0},
          {"median", median}};
}

int cmd_eval_fits(const EvalFlags& flags, std::ostream& out) {
  const RunSettings s = flags.binding.resolve();
  if (flags.reference.empty()) throw ConfigError("--reference is required");
  if (flags.fits.empty()) throw ConfigError("at least one --fit is required");
  const json ref_json = read_json_file(flags.reference, "reference");
  const Reference ref{json_vector(ref_json, "alpha", flags.reference),
                      json_vector(ref_json, "beta", flags.reference)};
  Eigen::VectorXd ref_stacked(ref.alpha.size() + ref.beta.size());
  ref_stacked << ref.alpha, ref.beta;

  json rows = json::array();
  std::vector<double> mres;
  std::vector<double> res;
  for (const std::string& path : flags.fits) {
    const FitResult fit = fit_result_from_json(read_json_file(path, "fit result"));
    if (fit.params.alpha.size() != ref.alpha.size() ||
        fit.params.beta.size() != ref.beta.size()) {
      throw ShapeError("'" + path + "' does not match the reference dimensions");
    }
    const Eigen::VectorXd one[] = {fit.stacked()};
    const double m = mre(one, ref_stacked);
    const double r = relative_error(fit.params.beta, ref.beta);
    mres.push_back(m);
    res.push_back(r);
    json row = {{"path", path}, {"mechanism", std::string(to_string(fit.mechanism))},
                {"mre", m}, {"re_beta", r}};
    if (fit.epsilon) row["epsilon"] = *fit.epsilon;
    if (fit.lambda) row["lambda"] = *fit.lambda;
    if (fit.seed) row["seed"] = *fit.seed;
    rows.push_back(row);
  }
  const json metrics = {{"kind", "fit_metrics"},
                        {"reference", flags.reference},
                        {"fits", rows},
                        {"count", flags.fits.size()},
                        {"mre", summary_json(mres)},
                        {"re_beta", summary_json(res)}};
  write_output(s.output.value_or("-"), dump(metrics), out);
  return kExitOk;
}

int cmd_eval_sweep(const EvalFlags& flags, std::ostream& out) {
  const RunSettings s = flags.binding.resolve();
  if (!s.sweep_output) throw ConfigError("--sweep-output is required with --sweep");
  const OptimSettings optim = optim_settings(s);
  if (s.link && parse_link(*s.link) != LinkFunction::Logit) {
    throw ConfigError("sweeps use the logit link");
  }

  SweepConfig cfg;
  if (s.epsilons) cfg.epsilons = *s.epsilons;
  cfg.seeds = s.seeds.value_or(20);
  cfg.base_seed = s.seed.value_or(fresh_seed());
  cfg.optim = optim;
  cfg.psgld = psgld_config(s);
  cfg.v = s.v;
  cfg.sigma = s.sigma;
  cfg.threads = s.threads.value_or(0);
  const std::vector<std::string> names =
      s.mechanisms.value_or(std::vector<std::string>{"out_pert", "obj_pert", "sampler"});
  for (const std::string& name : names) {
    SweepArm arm;
    arm.mechanism = parse_mechanism(name);
    if (arm.mechanism == Mechanism::None) throw ConfigError("sweep mechanisms must be private");
    if (arm.mechanism != Mechanism::Sampler) arm.lambda = require_positive(s.lambda, "lambda");
    cfg.arms.push_back(arm);
  }
  const double ref_lambda = s.reference_lambda.value_or(0.0);

  const LoadedData data = load_data(s);
  const FitResult reference = fit_nonprivate(data.ds, data.basis, ref_lambda, optim);
  const std::vector<SweepRow> rows = run_sweep(data.ds, data.basis, reference.stacked(), cfg);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  json row_json = json::array();
  for (const SweepRow& r : rows) {
    row_json.push_back({{"epsilon", r.epsilon},
                        {"mechanism", std::string(to_string(r.mechanism))},
                        {"lambda", r.lambda},
                        {"mre_mean", r.mre_mean},
                        {"mre_std", r.mre_std},
                        {"mre_median", r.mre_median},
                        {"runs", r.runs}});
  }
  const json metrics = {{"kind", "sweep_metrics"},
                        {"base_seed", cfg.base_seed},
                        {"seeds", cfg.seeds},
                        {"reference_fit", to_json(reference)},
                        {"rows", row_json}};
  write_output(*s.sweep_output, csv.str(), out);
  if (s.output) write_output(*s.output, dump(metrics), out);
  return kExitOk;
}

struct SensitivityFlags {
  FlagBinding binding;
};

int cmd_sensitivity(const SensitivityFlags& flags, std::ostream& out) {
  const RunSettings s = flags.binding.resolve();
  if (!s.n) throw ConfigError("--n is required");
  if (*s.n < 1) throw ConfigError("n must be >= 1");
  const double lambda = require_positive(s.lambda, "lambda");
  const double epsilon = require_positive(s.epsilon, "epsilon");

  std::vector<double> norms;
  json source;
  if (s.interval_norms) {
    norms = *s.interval_norms;
    if (norms.empty()) throw ConfigError("--interval-norm needs at least one value");
    for (double a : norms) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("interval norms must be >= 0");
    }
    source = "override";
  } else {
    const int q = s.q.value_or(200);
    const int e = s.e.value_or(3);
    const SplineBasis basis(e, q);
    const Eigen::VectorXd& bn = basis.interval_norms();
    norms.assign(bn.data(), bn.data() + bn.size());
    source = {{"q", q}, {"e", e}};
  }
  const ObjPertBudget budget = obj_pert_budget(norms, *s.n, epsilon, lambda);
  const json result = {{"kind", "sensitivity"},
                       {"n", *s.n},
                       {"lambda", lambda},
                       {"epsilon", epsilon},
                       {"intervals", norms.size()},
                       {"interval_norms_from", source},
                       {"gradient_diff_bound", gradient_diff_bound(norms)},
                       {"out_pert_sensitivity", out_pert_sensitivity(norms, *s.n, lambda)},
                       {"epsilon_prime", budget.epsilon_prime},
                       {"delta", budget.delta}};
  write_output(s.output.value_or("-"), dump(result), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private discrete-time survival regression", "dpsurv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dpsurv 1.0.0");

  FlagBinding fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model, privately or not");
  fit->add_option("--mechanism", fit_flags.flags.mechanism,
                  "none (default), out_pert, obj_pert or sampler");
  fit->add_option("--epsilon", fit_flags.flags.epsilon, "Privacy budget");
  fit->add_option("--lambda", fit_flags.flags.lambda, "L2 regularization weight");
  fit->add_option("--seed", fit_flags.flags.seed, "Noise seed (default: OS entropy)");
  fit->add_option("--output", fit_flags.flags.output, "Fit result JSON ('-' = stdout)");
  fit->add_option("--trace", fit_flags.flags.trace,
                  "Sampler only: write a diagnostic (non-private) trace CSV");
  fit->add_option("--trace-every", fit_flags.flags.trace_every, "Keep every k-th trace row");
  add_data_flags(fit, fit_flags);
  add_sampler_flags(fit, fit_flags);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "Simulate a dataset from known parameters");
  synth->add_option("--spec", synth_flags.spec_path, "Synthetic spec JSON")->required();
  synth->add_option("--output", synth_flags.output, "Dataset CSV")->required();
  synth->add_option("--truth", synth_flags.truth, "Truth JSON")->required();
  synth->add_option("--seed", synth_flags.seed, "Overrides the spec's seed");

  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "Score fits, or run a privacy-utility sweep");
  eval->add_option("--reference", eval_flags.reference,
                   "Truth or fit JSON holding alpha and beta");
  eval->add_option("--fit", eval_flags.fits, "Fit result JSON (repeatable)");
  eval->add_flag("--sweep", eval_flags.sweep,
                 "Fit every mechanism over a grid of epsilons and seeds");
  eval->add_option("--output", eval_flags.binding.flags.output, "Metrics JSON ('-' = stdout)");
  eval->add_option("--sweep-output", eval_flags.binding.flags.sweep_output, "Sweep CSV");
  eval->add_option("--epsilons", eval_flags.binding.flags.epsilons,
                   "Budgets (default 0.1 0.2 0.4 0.8 1.6 3.2 6.4)");
  eval->add_option("--mechanisms", eval_flags.binding.flags.mechanisms,
                   "Mechanisms to sweep (default out_pert obj_pert sampler)");
  eval->add_option("--seeds", eval_flags.binding.flags.seeds, "Runs per cell (default 20)");
  eval->add_option("--seed", eval_flags.binding.flags.seed, "Base seed (default: OS entropy)");
  eval->add_option("--lambda", eval_flags.binding.flags.lambda,
                   "Regularization for the perturbation mechanisms");
  eval->add_option("--reference-lambda", eval_flags.binding.flags.reference_lambda,
                   "Regularization of the non-private reference fit (default 0)");
  eval->add_option("--threads", eval_flags.binding.flags.threads,
                   "Worker threads (default: all cores)");
  add_data_flags(eval, eval_flags.binding);
  add_sampler_flags(eval, eval_flags.binding);

  SensitivityFlags sens_flags;
  CLI::App* sens = app.add_subcommand("sensitivity", "Print the noise calibration constants");
  sens->add_option("--config", sens_flags.binding.config_path, "JSON config");
  sens->add_option("--n", sens_flags.binding.flags.n, "Dataset size");
  sens->add_option("--lambda", sens_flags.binding.flags.lambda, "L2 regularization weight");
  sens->add_option("--epsilon", sens_flags.binding.flags.epsilon, "Privacy budget");
  sens->add_option("--q", sens_flags.binding.flags.q, "Number of intervals (default 200)");
  sens->add_option("--e", sens_flags.binding.flags.e, "Number of knots (default 3)");
  sens->add_option("--interval-norm", sens_flags.binding.flags.interval_norms,
                   "Use these ||A_s|| values instead of a built basis");
  sens->add_option("--output", sens_flags.binding.flags.output, "JSON ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_flags, out);
    if (synth->parsed()) return cmd_synth(synth_flags, out);
    if (eval->parsed()) {
      return eval_flags.sweep ? cmd_eval_sweep(eval_flags, out) : cmd_eval_fits(eval_flags, out);
    }
    if (sens->parsed()) return cmd_sensitivity(sens_flags, out);
  } catch (const UsageError& ex) {
    err << "dpsurv: error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const ChainError& ex) {
    err << "dpsurv: chain failure at step " << ex.step() << ": " << ex.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& ex) {
    err << "dpsurv: failure: " << ex.what() << '\n';
    return kExitRuntime;
  }
  err << "dpsurv: no subcommand given\n";
  return kExitUsage;
}

}  // namespace dpsurv
