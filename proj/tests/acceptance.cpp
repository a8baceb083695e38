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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dpsurv/eval.hpp"
#include "dpsurv/mechanisms.hpp"
#include "dpsurv/model.hpp"
#include "dpsurv/noise.hpp"
#include "dpsurv/sampler.hpp"
#include "dpsurv/sweep.hpp"
#include "support.hpp"

using namespace dpsurv;
using testing::Gen;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// --- 1 ---------------------------------------------------------------------
Verdict gradient_correctness() {
  Gen gen(1001);
  const SplineBasis basis = build_basis(3, 20);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd f = gen.vector(6);
    const SurvivalRecord d = gen.record(3, 20);
    const Eigen::VectorXd g = record_grad(f, d, basis);
    const Eigen::VectorXd fd = testing::central_difference(
        [&](const Eigen::VectorXd& z) { return record_loss(z, d, basis); }, f, 1e-6);
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  return {worst < 1e-5, fmt("max relative error %.3g over 100 cases (< 1e-5)", worst)};
}

// --- 2 ---------------------------------------------------------------------
Verdict gradient_difference_bound() {
  Gen gen(1002);
  const SplineBasis basis = build_basis(3, 10);
  const double bound = gradient_diff_bound(basis);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::VectorXd f = gen.vector(3 + 2, std::exp(gen.uniform(-3.0, 4.0)));
    const SurvivalRecord di = gen.record(2, 10), dj = gen.record(2, 10);
    const double diff = (record_grad(f, di, basis) - record_grad(f, dj, basis)).norm();
    worst = std::max(worst, diff);
    violations += diff > bound;
  }
  return {violations == 0,
          fmt("%d violations in 10^4 triples; largest difference %.4f vs bound %.4f", violations,
              worst, bound)};
}

// --- 3 ---------------------------------------------------------------------
Verdict output_sensitivity() {
  Gen gen(1003);
  const SplineBasis basis = build_basis(3, 10);
  OptimSettings tight;
  tight.grad_tol = 1e-10;
  const double t = out_pert_sensitivity(basis, 50, 0.1);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const SurvivalDataset ds = gen.dataset(50, 2, 10);
    const SurvivalDataset nb =
        swap_record(ds, static_cast<std::size_t>(gen.integer(0, 49)), gen.record(2, 10));
    const FitResult a = fit_nonprivate(ds, basis, 0.1, tight);
    const FitResult b = fit_nonprivate(nb, basis, 0.1, tight);
    const double gap = (a.stacked() - b.stacked()).norm();
    worst = std::max(worst, gap);
    violations += gap > t;
  }
  return {violations == 0, fmt("%d of 200 neighbour pairs exceed t = %.4f; largest gap %.4f",
                               violations, t, worst)};
}

// --- 4 ---------------------------------------------------------------------
Verdict gamma_noise_law() {
  Rng rng(1004);
  std::vector<double> radii;
  Eigen::VectorXd mean_dir = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd b = sample_gamma_sphere(5, 0.3, rng);
    radii.push_back(b.norm());
    mean_dir += b / b.norm();
  }
  mean_dir /= 10000.0;
  const double ks = testing::ks_statistic(
      radii, [](double x) { return testing::erlang_cdf(x, 5, 0.3); });
  const double crit = testing::ks_critical_001(radii.size());
  return {ks < crit && mean_dir.norm() < 0.02,
          fmt("KS %.4f (critical %.4f at 0.01); direction mean norm %.4f (< 0.02)", ks, crit,
              mean_dir.norm())};
}

// --- 5 ---------------------------------------------------------------------
Verdict empirical_dp_ratio() {
  // p = 1, q = 2, n = 5; e = 2 knots, so outputs live in R^3.
  const SplineBasis basis = build_basis(2, 2);
  Gen gen(1005);
  const SurvivalDataset ds = gen.dataset(5, 1, 2);
  SurvivalRecord other;
  other.x = Eigen::VectorXd::Constant(1, -ds[0].x[0] >= 0 ? 1.0 : -1.0);
  other.y = -ds[0].y;
  other.t = ds[0].t == 1 ? 2 : 1;
  const SurvivalDataset nb = swap_record(ds, 0, other);

  const double eps = 1.0, lambda = 1.0;
  const double bound = std::exp(eps) * 1.15;
  std::string detail;
  bool pass = true;
  for (Mechanism m : {Mechanism::OutPert, Mechanism::ObjPert}) {
    PerturbationConfig base;
    base.epsilon = eps;
    base.lambda = lambda;
    const MechanismRunner runner = [&, m](const SurvivalDataset& d, std::uint64_t seed) {
      PerturbationConfig cfg = base;
      cfg.seed = seed;
      return m == Mechanism::OutPert ? fit_out_pert(d, basis, cfg).stacked()
                                     : fit_obj_pert(d, basis, cfg).stacked();
    };
    // Bins span +-8 noise scales (projected onto coordinate 0) around the
    // midpoint of the two minimizers.
    double scale;
    if (m == Mechanism::OutPert) {
      scale = out_pert_sensitivity(basis, 5, lambda) / eps;
    } else {
      const ObjPertBudget budget = obj_pert_budget(basis, 5, eps, lambda);
      scale = gradient_diff_bound(basis) / budget.epsilon_prime / (5.0 * (lambda + budget.delta));
    }
    const double center = 0.5 * (fit_nonprivate(ds, basis, lambda).stacked()[0] +
                                 fit_nonprivate(nb, basis, lambda).stacked()[0]);
    DpRatioOptions opt;
    opt.epsilon = eps;
    opt.runs = 100000;
    opt.bins = {center - 8.0 * scale, center + 8.0 * scale, 40};
    opt.seed = m == Mechanism::OutPert ? 51 : 52;
    const DpRatioReport r = dp_ratio_test(runner, ds, nb, opt);
    pass &= r.max_ratio <= bound && r.bins_compared > 0;
    detail += fmt("%s max ratio %.4f over %zu bins; ", std::string(to_string(m)).c_str(),
                  r.max_ratio, r.bins_compared);
  }
  detail += fmt("bound e^1 * 1.15 = %.4f", bound);
  return {pass, detail};
}

// --- 6 ---------------------------------------------------------------------
Verdict published_relative_error() {
  const Eigen::Vector3d beta(0.0122443, -0.849823, -0.239539);
  const Eigen::Vector3d reference(0.0585478, -0.790977, -0.23906);
  const double re = relative_error(beta, reference);
  return {std::abs(re - 0.09039) <= 0.0005, fmt("RE %.6f (target 0.09039 +- 0.0005)", re)};
}

// --- 7 ---------------------------------------------------------------------
SynthSpec recovery_spec(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.p = 2;
  spec.q = 50;
  spec.e = 3;
  spec.true_alpha = Eigen::Vector3d(-3.0, 0.5, 1.0);
  spec.true_beta = Eigen::Vector2d(1.0, -0.5);
  spec.censor_prob = 0.2;
  spec.seed = seed;
  return spec;
}

Verdict mle_recovery() {
  const SplineBasis basis = build_basis(3, 50);
  const auto re_at = [&](std::size_t n, std::uint64_t seed) {
    const SynthSpec spec = recovery_spec(n, seed);
    const FitResult fit = fit_nonprivate(generate_synthetic(spec, basis), basis, 0.0);
    return relative_error(fit.params.beta, spec.true_beta);
  };
  // Five replicate datasets per size; the first large one is the headline.
  std::vector<double> large, small;
  for (std::uint64_t s = 0; s < 5; ++s) {
    large.push_back(re_at(5000, 700 + s));
    small.push_back(re_at(500, 700 + s));
  }
  double mean_large = 0, mean_small = 0;
  for (double v : large) mean_large += v / 5;
  for (double v : small) mean_small += v / 5;
  return {large[0] < 0.10 && mean_small > mean_large,
          fmt("RE(n=5000) = %.4f (< 0.10); mean RE over 5 datasets: n=5000 %.4f, n=500 %.4f",
              large[0], mean_large, mean_small)};
}

// --- 8 ---------------------------------------------------------------------
Verdict sampler_one_dimensional() {
  // Logistic regression on one covariate: q = 1, e = 2, both spline
  // coefficients held at 0, so the chain moves beta alone.
  const std::size_t n = 200;
  const double eps = 2.0;
  SynthSpec spec;
  spec.n = n;
  spec.p = 1;
  spec.q = 1;
  spec.e = 2;
  spec.true_alpha = Eigen::Vector2d::Zero();
  spec.true_beta = Eigen::VectorXd::Constant(1, 1.5);
  spec.seed = 3;
  const SplineBasis basis = build_basis(2, 1);
  const SurvivalDataset ds = generate_synthetic(spec, basis);
  const SanitizerConfig sc = SanitizerConfig::defaults(n, eps);

  // Quadrature of exp((eps / 2v) U) on 10^4 midpoints of [-15, 15].
  const int grid = 10000;
  const double lo = -15.0, hi = 15.0;
  std::vector<double> xs(grid), w(grid);
  double top = -INFINITY;
  for (int i = 0; i < grid; ++i) {
    xs[i] = lo + (hi - lo) * (i + 0.5) / grid;
    w[i] = eps / (2 * sc.v) * utility(Eigen::Vector3d(0, 0, xs[i]), ds, basis, sc);
    top = std::max(top, w[i]);
  }
  double z = 0;
  for (double& v : w) z += (v = std::exp(v - top));
  for (double& v : w) v /= z;
  if (w.front() > 1e-12 || w.back() > 1e-12) return {false, "quadrature window too narrow"};

  // 30 equal bins between the 0.1% and 99.9% target quantiles, plus one
  // bin for each tail.
  double cum = 0, qlo = NAN, qhi = NAN;
  for (int i = 0; i < grid; ++i) {
    cum += w[i];
    if (std::isnan(qlo) && cum > 0.001) qlo = xs[i];
    if (std::isnan(qhi) && cum > 0.999) qhi = xs[i];
  }
  const HistogramBins bins{qlo, qhi, 30};
  const auto slot = [&](double x) {
    return x < qlo ? 30 : x >= qhi ? 31 : static_cast<int>(bins.index(x));
  };
  std::vector<double> target(32, 0.0), chain(32, 0.0);
  for (int i = 0; i < grid; ++i) target[slot(xs[i])] += w[i];

  PsgldConfig cfg;
  cfg.burn_in = 10000;
  cfg.steps = cfg.burn_in + 200000;
  cfg.lr_scale = 0.3;
  cfg.seed = 8;
  cfg.frozen = {1, 1, 0};
  double kept = 0;
  fit_sampled(ds, basis, eps, sc, cfg, [&](const ChainState& s) {
    if (s.step - 1 > cfg.burn_in) {
      chain[slot(s.f[2])] += 1;
      kept += 1;
    }
  });
  double tv = 0;
  for (int i = 0; i < 32; ++i) tv += 0.5 * std::abs(chain[i] / kept - target[i]);
  return {tv < 0.05, fmt("TV distance %.4f (< 0.05) over %.0f post-burn-in states", tv, kept)};
}

// --- 9 and 10 share the synthetic dataset ----------------------------------
struct SweepData {
  SplineBasis basis;
  SurvivalDataset ds;
  Eigen::VectorXd reference;
};

const SweepData& sweep_data() {
  static const SweepData data = [] {
    const SplineBasis basis = build_basis(3, 20);
    SynthSpec spec;
    spec.n = 5000;
    spec.p = 2;
    spec.q = 20;
    spec.e = 3;
    spec.true_alpha = Eigen::Vector3d(-2.0, 0.5, 1.0);
    spec.true_beta = Eigen::Vector2d(1.0, -0.5);
    spec.censor_prob = 0.2;
    spec.seed = 11;
    SurvivalDataset ds = generate_synthetic(spec, basis);
    Eigen::VectorXd reference = fit_nonprivate(ds, basis, 0.0).stacked();
    return SweepData{basis, std::move(ds), std::move(reference)};
  }();
  return data;
}

Verdict privacy_utility_trend() {
  const SweepData& data = sweep_data();
  const std::vector<double> lambdas = {1e-3, 1e-2, 1e-1};
  SweepConfig cfg;
  cfg.seeds = 20;
  cfg.base_seed = 99;
  for (double l : lambdas) cfg.arms.push_back({Mechanism::OutPert, l});
  for (double l : lambdas) cfg.arms.push_back({Mechanism::ObjPert, l});
  cfg.arms.push_back({Mechanism::Sampler, 0.0});
  cfg.psgld.steps = 10 * data.ds.size();  // 10 epochs
  cfg.psgld.lr_scale = 3e-4;
  const std::vector<SweepRow> rows = run_sweep(data.ds, data.basis, data.reference, cfg);
  const std::size_t ne = cfg.epsilons.size();

  // Median curve of arm a, and the arm of a mechanism with the lowest median
  // at the largest budget.
  const auto curve = [&](std::size_t a) {
    std::vector<double> c;
    for (std::size_t i = 0; i < ne; ++i) c.push_back(rows[a * ne + i].mre_median);
    return c;
  };
  const auto best_arm = [&](std::size_t first) {
    std::size_t best = first;
    for (std::size_t a = first; a < first + lambdas.size(); ++a) {
      if (curve(a).back() < curve(best).back()) best = a;
    }
    return best;
  };
  const auto monotone = [](const std::vector<double>& c) {
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i] > c[i - 1]) return false;
    }
    return true;
  };
  const auto show = [](const std::vector<double>& c) {
    std::string s;
    for (double v : c) s += fmt("%s%.3f", s.empty() ? "" : " ", v);
    return s;
  };
  const std::size_t out_best = best_arm(0), obj_best = best_arm(3), sampler = 6;
  const auto out_c = curve(out_best), obj_c = curve(obj_best), smp_c = curve(sampler);
  const bool pass = monotone(out_c) && monotone(obj_c) && monotone(smp_c) &&
                    smp_c.back() < out_c.back();
  return {pass,
          fmt("median MRE over eps 0.1..6.4: out_pert(lambda=%g) [%s]; obj_pert(lambda=%g) [%s]; "
              "sampler [%s]; at 6.4 sampler %.4f vs best out_pert %.4f",
              cfg.arms[out_best].lambda, show(out_c).c_str(), cfg.arms[obj_best].lambda,
              show(obj_c).c_str(), show(smp_c).c_str(), smp_c.back(), out_c.back())};
}

Verdict convergence_stability() {
  const SweepData& data = sweep_data();
  const std::size_t n = data.ds.size();
  const std::size_t epochs = 250;
  const double eps = 6.4;
  PsgldConfig cfg;
  cfg.steps = epochs * n;
  cfg.lr_scale = 1e-3;
  cfg.seed = 10;
  const double ref_norm = data.reference.norm();

  // MRE after epoch k averages ||f - f*|| / ||f*|| over every post-burn-in
  // state up to the end of that epoch. The mean within each single epoch
  // is reported alongside for context.
  std::vector<double> running, within;
  double sum = 0, epoch_sum = 0;
  std::size_t count = 0, epoch_count = 0;
  fit_sampled(data.ds, data.basis, eps, SanitizerConfig::defaults(n, eps), cfg,
              [&](const ChainState& s) {
                const std::size_t done = s.step - 1;
                if (done > cfg.burn_in) {
                  const double r = (s.f - data.reference).norm() / ref_norm;
                  sum += r;
                  ++count;
                  epoch_sum += r;
                  ++epoch_count;
                }
                if (done % n == 0) {
                  running.push_back(count ? sum / count : NAN);
                  within.push_back(epoch_count ? epoch_sum / epoch_count : NAN);
                  epoch_sum = 0;
                  epoch_count = 0;
                }
              });
  const std::size_t start = epochs - epochs / 5;
  double lo = INFINITY, hi = -INFINITY, mean = 0, wlo = INFINITY, whi = -INFINITY;
  for (std::size_t i = start; i < epochs; ++i) {
    lo = std::min(lo, running[i]);
    hi = std::max(hi, running[i]);
    mean += running[i] / static_cast<double>(epochs - start);
    wlo = std::min(wlo, within[i]);
    whi = std::max(whi, within[i]);
  }
  const double variation = (hi - lo) / mean;
  return {variation < 0.05,
          fmt("MRE over epochs %zu-%zu ranges %.4f-%.4f, relative variation %.4f (< 0.05); "
              "single-epoch means range %.3f-%.3f",
              start + 1, epochs, lo, hi, variation, wlo, whi)};
}

// --- 11 --------------------------------------------------------------------
Verdict sanitizer_identities() {
  Gen gen(1011);
  double cap_excess = -INFINITY, deriv_err = 0, remainder_excess = -INFINITY;
  for (int i = 0; i < 100000; ++i) {
    const double v = std::exp(gen.uniform(-3.0, 5.0));
    const double x = gen.uniform(-1.0, 1.0) * std::exp(gen.uniform(-5.0, 8.0)) * v;
    const double c = sanitize(x, v);
    cap_excess = std::max(cap_excess, c - v);
    deriv_err = std::max(deriv_err, std::abs(sanitize_deriv(x, v) - (1 - (c / v) * (c / v))));
    const double y = gen.uniform(0.0, v);
    remainder_excess = std::max(remainder_excess,
                                std::abs(sanitize(y, v) - y) - (y * y * y / (3 * v * v) + 1e-12));
  }
  return {cap_excess <= 0.0 && deriv_err <= 1e-12 && remainder_excess < 0.0,
          fmt("max C_v(x) - v = %.3g; max derivative identity error %.3g; max remainder "
              "excess %.3g",
              cap_excess, deriv_err, remainder_excess)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient matches finite differences", gradient_correctness},
      {"gradient difference bound holds", gradient_difference_bound},
      {"neighbouring minimizers within output sensitivity", output_sensitivity},
      {"Gamma-norm noise law", gamma_noise_law},
      {"empirical DP ratio", empirical_dp_ratio},
      {"published relative error", published_relative_error},
      {"MLE recovery on synthetic data", mle_recovery},
      {"sampler matches a 1-D target", sampler_one_dimensional},
      {"privacy-utility trend", privacy_utility_trend},
      {"sampler MRE stabilizes", convergence_stability},
      {"sanitizer identities", sanitizer_identities},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id,
                criteria[i].first, v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
