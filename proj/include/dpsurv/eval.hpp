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

// Error metrics, a forward simulator for the survival model and an
// empirical check of the DP density-ratio bound.

#ifndef DPSURV_EVAL_HPP_
#define DPSURV_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dpsurv/dataset.hpp"
#include "dpsurv/model.hpp"
#include "dpsurv/spline.hpp"
#include "json.hpp"

namespace dpsurv {

// Mean of ||f_i - f*|| / ||f*|| over the samples (stacked [alpha; beta]).
// Throws NumericError if ||f*|| = 0, ConfigError for no samples and
// ShapeError for length mismatches.
double mre(std::span<const ModelParams> samples, const ModelParams& f_star);
double mre(std::span<const Eigen::VectorXd> samples, const Eigen::VectorXd& f_star);

// ||beta - beta*|| / ||beta*||. Same errors as mre().
double relative_error(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_star);

struct SynthSpec {
  std::size_t n = 0;
  int p = 0;
  int q = 0;
  int e = 0;
  Eigen::VectorXd true_alpha;
  Eigen::VectorXd true_beta;
  double censor_prob = 0.0;
  std::uint64_t seed = 0;
  LinkFunction link = LinkFunction::Logit;

  void validate() const;
};

// Simulates n records. Covariates are uniform in the unit ball. Each record
// walks s = 1..q and fails at the first s where a uniform draw falls below
// h(s). With probability censor_prob (drawn independently) the record is
// instead censored at an interval drawn uniformly from those before its
// failure, or from 1..q if it never fails; a record failing at s = 1 cannot
// be censored earlier. A record that never fails is censored at q.
// `basis` must match spec.e and spec.q.
SurvivalDataset generate_synthetic(const SynthSpec& spec, const SplineBasis& basis);

// Raw rows for a model-scale dataset, placing each record at the middle of
// its interval: time = (t - 0.5) / q. from_normalized() maps them back to
// the same records.
std::vector<RawRecord> to_raw_records(const SurvivalDataset& ds);

// Output of one mechanism run on a dataset with a given seed. Must be safe
// to call concurrently.
using MechanismRunner =
    std::function<Eigen::VectorXd(const SurvivalDataset&, std::uint64_t seed)>;

struct HistogramBins {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 10;

  // Bin index for x, or count if x falls outside [lo, hi).
  std::size_t index(double x) const;
  double edge(std::size_t i) const;
};

struct DpRatioOptions {
  double epsilon = 1.0;
  std::size_t runs = 100'000;  // per dataset; at least 10^4
  HistogramBins bins;
  std::size_t projection = 0;  // coordinate of the output that is histogrammed
  std::size_t min_hits = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct DpRatioReport {
  std::vector<std::size_t> counts_a;
  std::vector<std::size_t> counts_b;
  std::size_t bins_compared = 0;
  double max_forward_ratio = 0.0;   // max over bins of freq_a / freq_b
  double max_backward_ratio = 0.0;  // max over bins of freq_b / freq_a
  double max_ratio = 0.0;           // larger of the two
  std::vector<std::size_t> violating_bins;  // ratio above exp(epsilon)
};

// Runs the mechanism `runs` times on each of two neighboring datasets and
// compares histograms of one output coordinate. Run i uses the seed
// derive_seed(options.seed, i) on both datasets. Only bins with at least
// min_hits in both histograms are compared. Throws ConfigError when the
// datasets differ in more than one record or runs < 10^4.
DpRatioReport dp_ratio_test(const MechanismRunner& runner,
                            const SurvivalDataset& a, const SurvivalDataset& b,
                            const DpRatioOptions& options);

nlohmann::json to_json(const DpRatioReport& report);
// Columns bin_lo, bin_hi, count_a, count_b.
void write_histogram_csv(std::ostream& out, const DpRatioReport& report,
                         const HistogramBins& bins);

}  // namespace dpsurv

#endif  // DPSURV_EVAL_HPP_
