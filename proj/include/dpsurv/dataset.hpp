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

#ifndef DPSURV_DATASET_HPP_
#define DPSURV_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dpsurv {

// One row of an input file, before any normalization.
struct RawRecord {
  double time = 0.0;  // original units, >= 0
  bool event = false;  // true = failure observed, false = censored
  std::vector<double> covariates;

  bool operator==(const RawRecord&) const = default;
};

// One patient on the model scale: ||x|| <= 1, y = 2*delta - 1, t in 1..q.
struct SurvivalRecord {
  Eigen::VectorXd x;
  int y = 1;
  int t = 1;

  bool event() const { return y > 0; }
  bool operator==(const SurvivalRecord& other) const {
    return y == other.y && t == other.t && x.size() == other.x.size() &&
           x == other.x;
  }
};

// The affine map applied by normalize(), kept so new data can be mapped the
// same way: x_model = (x_raw - covariate_means) / covariate_scale and
// u = time / time_scale.
struct NormalizationReport {
  double time_scale = 1.0;
  std::vector<double> covariate_means;
  double covariate_scale = 1.0;

  bool operator==(const NormalizationReport&) const = default;
};

// Immutable collection of SurvivalRecords sharing dimension p and horizon q.
class SurvivalDataset {
 public:
  // Throws ShapeError / BoundsError / ConfigError if a record breaks the
  // invariants (||x|| <= 1 + 1e-12, y in {-1,+1}, 1 <= t <= q, common p).
  SurvivalDataset(std::vector<SurvivalRecord> records, int q, int p,
                  NormalizationReport normalization = {});

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  int q() const { return q_; }
  int p() const { return p_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<SurvivalRecord>& records() const { return records_; }
  const NormalizationReport& normalization() const { return normalization_; }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::vector<SurvivalRecord> records_;
  int q_;
  int p_;
  NormalizationReport normalization_;
};

// Column mapping for load_csv. An empty covariate list means "every column
// other than time and event, in file order".
struct CsvSchema {
  std::string time_column = "time";
  std::string event_column = "event";
  std::vector<std::string> covariate_columns;
};

// Reads a comma-separated file with a header row. Errors: SchemaError for a
// missing column, ParseError (with 1-based data row) for a non-numeric cell,
// ValueError for an event outside {0,1} or a negative/non-finite time.
std::vector<RawRecord> load_csv(const std::filesystem::path& path,
                                const CsvSchema& schema = {});
std::vector<RawRecord> parse_csv(std::istream& in,
                                 const CsvSchema& schema = {});

// Writes a `time,event,<covariate_names...>` header and one row per record.
// Numbers use 17 significant digits so they parse back to the same double.
void write_csv(std::ostream& out, std::span<const RawRecord> records,
               std::span<const std::string> covariate_names);

// Interval index for a normalized time u in [0,1]: max(1, ceil(u*q)),
// clamped to q.
int interval_index(double u, int q);

// Scales times by the maximum time, centers covariates per column and
// divides by the largest resulting norm (1 if all covariates coincide).
SurvivalDataset normalize(std::span<const RawRecord> raw, int q);

// Maps already-normalized raw rows (0 <= time <= 1, ||x|| <= 1) without
// rescaling; the report is the identity transform.
SurvivalDataset from_normalized(std::span<const RawRecord> raw, int q);

// Applies a stored report to fresh raw data. Times past the original maximum
// land in interval q; covariates that map outside the unit ball are
// projected onto it.
SurvivalDataset apply_normalization(std::span<const RawRecord> raw, int q,
                                    const NormalizationReport& report);

// Returns a copy of `ds` with record `index` replaced; used to build
// neighboring datasets.
SurvivalDataset swap_record(const SurvivalDataset& ds, std::size_t index,
                            SurvivalRecord replacement);

// Number of positions at which two equally-sized datasets differ.
std::size_t record_distance(const SurvivalDataset& a, const SurvivalDataset& b);

}  // namespace dpsurv

#endif  // DPSURV_DATASET_HPP_
