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

#include "dpsurv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include "dpsurv/errors.hpp"
#include "dpsurv/noise.hpp"

namespace dpsurv {
namespace {

double relative_distance(const Eigen::VectorXd& f, const Eigen::VectorXd& ref,
                         double ref_norm) {
  if (f.size() != ref.size()) {
    throw ShapeError("vector of length " + std::to_string(f.size()) +
                     " compared with reference of length " +
                     std::to_string(ref.size()));
  }
  return (f - ref).norm() / ref_norm;
}

double reference_norm(const Eigen::VectorXd& ref) {
  const double norm = ref.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericError("reference vector has zero or non-finite norm");
  }
  return norm;
}

Eigen::VectorXd uniform_in_ball(int p, Rng& rng) {
  const Eigen::VectorXd dir = sample_unit_sphere(p, rng);
  return std::pow(rng.uniform(), 1.0 / p) * dir;
}

}  // namespace

double mre(std::span<const Eigen::VectorXd> samples, const Eigen::VectorXd& f_star) {
  if (samples.empty()) throw ConfigError("mre needs at least one sample");
  const double ref = reference_norm(f_star);
  double sum = 0.0;
  for (const Eigen::VectorXd& f : samples) sum += relative_distance(f, f_star, ref);
  return sum / static_cast<double>(samples.size());
}

double mre(std::span<const ModelParams> samples, const ModelParams& f_star) {
  std::vector<Eigen::VectorXd> stacked;
  stacked.reserve(samples.size());
  for (const ModelParams& s : samples) stacked.push_back(s.stacked());
  return mre(stacked, f_star.stacked());
}

double relative_error(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_star) {
  return relative_distance(beta, beta_star, reference_norm(beta_star));
}

void SynthSpec::validate() const {
  if (n < 1) throw ConfigError("synthetic n must be >= 1");
  if (p < 1) throw ConfigError("synthetic p must be >= 1");
  if (q < 1) throw ConfigError("synthetic q must be >= 1");
  if (e < 2) throw ConfigError("synthetic e must be >= 2");
  if (true_alpha.size() != e) throw ShapeError("true_alpha must have length e");
  if (true_beta.size() != p) throw ShapeError("true_beta must have length p");
  if (!true_alpha.allFinite() || !true_beta.allFinite()) {
    throw ConfigError("true parameters must be finite");
  }
  if (!(censor_prob >= 0.0 && censor_prob < 1.0)) {
    throw ConfigError("censor_prob must lie in [0, 1)");
  }
}

SurvivalDataset generate_synthetic(const SynthSpec& spec, const SplineBasis& basis) {
  spec.validate();
  if (basis.num_knots() != spec.e || basis.num_intervals() != spec.q) {
    throw ShapeError("basis does not match the synthetic spec's e and q");
  }
  const Eigen::VectorXd baseline = basis.interval_matrix() * spec.true_alpha;
  Rng rng(spec.seed);
  std::vector<SurvivalRecord> records;
  records.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    SurvivalRecord rec;
    rec.x = uniform_in_ball(spec.p, rng);
    const double shift = spec.true_beta.dot(rec.x);

    int fail_at = spec.q + 1;
    for (int s = 1; s <= spec.q; ++s) {
      if (rng.uniform() < inverse_link(spec.link, baseline[s - 1] + shift)) {
        fail_at = s;
        break;
      }
    }
    const bool censor = rng.uniform() < spec.censor_prob;
    const int latest_censor = std::min(fail_at - 1, spec.q);
    if (censor && latest_censor >= 1) {
      rec.t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(latest_censor)));
      rec.y = -1;
    } else if (fail_at <= spec.q) {
      rec.t = fail_at;
      rec.y = 1;
    } else {
      rec.t = spec.q;
      rec.y = -1;
    }
    records.push_back(std::move(rec));
  }
  NormalizationReport identity;
  identity.covariate_means.assign(static_cast<std::size_t>(spec.p), 0.0);
  return SurvivalDataset(std::move(records), spec.q, spec.p, std::move(identity));
}

std::vector<RawRecord> to_raw_records(const SurvivalDataset& ds) {
  std::vector<RawRecord> raw;
  raw.reserve(ds.size());
  const double q = static_cast<double>(ds.q());
  for (const SurvivalRecord& d : ds) {
    raw.push_back({(d.t - 0.5) / q, d.event(),
                   std::vector<double>(d.x.data(), d.x.data() + d.x.size())});
  }
  return raw;
}

std::size_t HistogramBins::index(double x) const {
  if (!(x >= lo) || !(x < hi)) return count;
  const auto i = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(count));
  return std::min(i, count - 1);
}

double HistogramBins::edge(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count);
}

DpRatioReport dp_ratio_test(const MechanismRunner& runner,
                            const SurvivalDataset& a, const SurvivalDataset& b,
                            const DpRatioOptions& options) {
  if (!runner) throw ConfigError("no mechanism runner given");
  if (a.size() != b.size() || record_distance(a, b) > 1) {
    throw ConfigError("datasets must differ in at most one record");
  }
  if (options.runs < 10'000) throw ConfigError("dp ratio test needs at least 10^4 runs");
  if (options.bins.count < 1 || !(options.bins.hi > options.bins.lo)) {
    throw ConfigError("histogram needs at least one bin and hi > lo");
  }
  if (!(options.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");

  const std::size_t nbins = options.bins.count;
  unsigned threads = options.threads != 0 ? options.threads
                                          : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.runs));

  std::vector<std::vector<std::size_t>> local_a(threads, std::vector<std::size_t>(nbins + 1));
  std::vector<std::vector<std::size_t>> local_b(threads, std::vector<std::size_t>(nbins + 1));
  std::vector<std::exception_ptr> failures(threads);

  const auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < options.runs; i += threads) {
        const std::uint64_t seed = derive_seed(options.seed, i);
        const Eigen::VectorXd out_a = runner(a, seed);
        const Eigen::VectorXd out_b = runner(b, seed);
        if (options.projection >= static_cast<std::size_t>(out_a.size()) ||
            options.projection >= static_cast<std::size_t>(out_b.size())) {
          throw ShapeError("projection coordinate exceeds the output length");
        }
        const auto proj = static_cast<Eigen::Index>(options.projection);
        ++local_a[w][options.bins.index(out_a[proj])];
        ++local_b[w][options.bins.index(out_b[proj])];
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  DpRatioReport report;
  report.counts_a.assign(nbins, 0);
  report.counts_b.assign(nbins, 0);
  for (unsigned w = 0; w < threads; ++w) {
    for (std::size_t i = 0; i < nbins; ++i) {
      report.counts_a[i] += local_a[w][i];
      report.counts_b[i] += local_b[w][i];
    }
  }

  // Both histograms come from the same number of runs, so count ratios are
  // frequency ratios.
  const double bound = std::exp(options.epsilon);
  for (std::size_t i = 0; i < nbins; ++i) {
    const std::size_t ca = report.counts_a[i];
    const std::size_t cb = report.counts_b[i];
    if (ca < options.min_hits || cb < options.min_hits) continue;
    ++report.bins_compared;
    const double forward = static_cast<double>(ca) / static_cast<double>(cb);
    const double backward = static_cast<double>(cb) / static_cast<double>(ca);
    report.max_forward_ratio = std::max(report.max_forward_ratio, forward);
    report.max_backward_ratio = std::max(report.max_backward_ratio, backward);
    if (forward > bound || backward > bound) report.violating_bins.push_back(i);
  }
  report.max_ratio = std::max(report.max_forward_ratio, report.max_backward_ratio);
  return report;
}

nlohmann::json to_json(const DpRatioReport& report) {
  return nlohmann::json{{"max_ratio", report.max_ratio},
                        {"max_forward_ratio", report.max_forward_ratio},
                        {"max_backward_ratio", report.max_backward_ratio},
                        {"bins_compared", report.bins_compared},
                        {"violating_bins", report.violating_bins}};
}

void write_histogram_csv(std::ostream& out, const DpRatioReport& report,
                         const HistogramBins& bins) {
  out << "bin_lo,bin_hi,count_a,count_b\n";
  for (std::size_t i = 0; i < report.counts_a.size(); ++i) {
    out << bins.edge(i) << ',' << bins.edge(i + 1) << ',' << report.counts_a[i]
        << ',' << report.counts_b[i] << '\n';
  }
}

}  // namespace dpsurv
