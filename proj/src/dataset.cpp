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

#include "dpsurv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "dpsurv/errors.hpp"

namespace dpsurv {
namespace {

constexpr double kNormSlack = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_number(std::string_view cell, std::size_t row,
                    const std::string& column) {
  // from_chars rejects a leading '+', which some writers emit.
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("row " + std::to_string(row) + ": column '" + column +
                         "' is not numeric: '" + std::string(cell) + "'",
                     row);
  }
  return value;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaError("missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

void require_nonempty(std::span<const RawRecord> raw, int q) {
  if (q < 1) throw ConfigError("q must be >= 1, got " + std::to_string(q));
  if (raw.empty()) throw EmptyDatasetError("dataset is empty");
}

std::size_t common_dimension(std::span<const RawRecord> raw) {
  const std::size_t p = raw.front().covariates.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].covariates.size() != p) {
      throw ShapeError("record " + std::to_string(i) + " has " +
                       std::to_string(raw[i].covariates.size()) +
                       " covariates, expected " + std::to_string(p));
    }
    if (!std::isfinite(raw[i].time) || raw[i].time < 0.0) {
      throw ValueError("record " + std::to_string(i) +
                       " has an invalid time");
    }
    for (double c : raw[i].covariates) {
      if (!std::isfinite(c)) {
        throw ValueError("record " + std::to_string(i) +
                         " has a non-finite covariate");
      }
    }
  }
  return p;
}

SurvivalRecord make_record(const RawRecord& raw, double u, Eigen::VectorXd x,
                           int q) {
  SurvivalRecord rec;
  rec.x = std::move(x);
  rec.y = raw.event ? 1 : -1;
  rec.t = interval_index(u, q);
  return rec;
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records, int q,
                                 int p, NormalizationReport normalization)
    : records_(std::move(records)),
      q_(q),
      p_(p),
      normalization_(std::move(normalization)) {
  if (q_ < 1) throw ConfigError("q must be >= 1");
  if (p_ < 1) throw ConfigError("p must be >= 1");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SurvivalRecord& r = records_[i];
    if (r.x.size() != p_) {
      throw ShapeError("record " + std::to_string(i) + " has dimension " +
                       std::to_string(r.x.size()) + ", expected " +
                       std::to_string(p_));
    }
    if (r.y != 1 && r.y != -1) {
      throw ValueError("record " + std::to_string(i) + " has y outside {-1,1}");
    }
    if (r.t < 1 || r.t > q_) {
      throw BoundsError("record " + std::to_string(i) + " has interval " +
                        std::to_string(r.t) + " outside 1.." +
                        std::to_string(q_));
    }
    if (!r.x.allFinite() || r.x.norm() > 1.0 + kNormSlack) {
      throw ValueError("record " + std::to_string(i) +
                       " covariates must be finite with norm <= 1");
    }
  }
}

std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  std::vector<std::string> header;
  for (std::string_view f : split_fields(line)) header.emplace_back(f);

  const std::size_t time_col = find_column(header, schema.time_column);
  const std::size_t event_col = find_column(header, schema.event_column);
  std::vector<std::size_t> cov_cols;
  if (schema.covariate_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != time_col && c != event_col) cov_cols.push_back(c);
    }
  } else {
    for (const std::string& name : schema.covariate_columns) {
      cov_cols.push_back(find_column(header, name));
    }
  }

  std::vector<RawRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       row);
    }
    RawRecord rec;
    rec.time = parse_number(fields[time_col], row, header[time_col]);
    if (!std::isfinite(rec.time) || rec.time < 0.0) {
      throw ValueError("row " + std::to_string(row) +
                           ": time must be finite and >= 0",
                       row);
    }
    const std::string_view ev = fields[event_col];
    if (ev == "1") {
      rec.event = true;
    } else if (ev == "0") {
      rec.event = false;
    } else {
      throw ValueError("row " + std::to_string(row) + ": event must be 0 or 1, got '" +
                           std::string(ev) + "'",
                       row);
    }
    rec.covariates.reserve(cov_cols.size());
    for (std::size_t c : cov_cols) {
      const double v = parse_number(fields[c], row, header[c]);
      if (!std::isfinite(v)) {
        throw ValueError("row " + std::to_string(row) + ": column '" +
                             header[c] + "' is not finite",
                         row);
      }
      rec.covariates.push_back(v);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path,
                                const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, std::span<const RawRecord> records,
               std::span<const std::string> covariate_names) {
  out << "time,event";
  for (const std::string& name : covariate_names) out << ',' << name;
  out << '\n';
  char buf[32];
  for (const RawRecord& rec : records) {
    if (rec.covariates.size() != covariate_names.size()) {
      throw ShapeError("covariate count does not match column names");
    }
    std::snprintf(buf, sizeof buf, "%.17g", rec.time);
    out << buf << ',' << (rec.event ? '1' : '0');
    for (double c : rec.covariates) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << ',' << buf;
    }
    out << '\n';
  }
}

int interval_index(double u, int q) {
  if (q < 1) throw ConfigError("q must be >= 1");
  const double scaled = std::ceil(u * static_cast<double>(q));
  if (!(scaled >= 1.0)) return 1;
  if (scaled >= static_cast<double>(q)) return q;
  return static_cast<int>(scaled);
}

SurvivalDataset normalize(std::span<const RawRecord> raw, int q) {
  require_nonempty(raw, q);
  const std::size_t p = common_dimension(raw);

  double max_time = 0.0;
  for (const RawRecord& r : raw) max_time = std::max(max_time, r.time);
  if (!(max_time > 0.0)) throw ValueError("maximum time must be > 0");

  NormalizationReport report;
  report.time_scale = max_time;
  report.covariate_means.assign(p, 0.0);
  for (const RawRecord& r : raw) {
    for (std::size_t j = 0; j < p; ++j) report.covariate_means[j] += r.covariates[j];
  }
  for (double& m : report.covariate_means) m /= static_cast<double>(raw.size());

  std::vector<Eigen::VectorXd> centered;
  centered.reserve(raw.size());
  double max_norm = 0.0;
  for (const RawRecord& r : raw) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
      x[static_cast<Eigen::Index>(j)] = r.covariates[j] - report.covariate_means[j];
    }
    max_norm = std::max(max_norm, x.norm());
    centered.push_back(std::move(x));
  }
  report.covariate_scale = max_norm > 0.0 ? max_norm : 1.0;

  std::vector<SurvivalRecord> records;
  records.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    records.push_back(make_record(raw[i], raw[i].time / max_time,
                                  centered[i] / report.covariate_scale, q));
  }
  return SurvivalDataset(std::move(records), q, static_cast<int>(p),
                         std::move(report));
}

SurvivalDataset from_normalized(std::span<const RawRecord> raw, int q) {
  require_nonempty(raw, q);
  const std::size_t p = common_dimension(raw);
  NormalizationReport report;
  report.covariate_means.assign(p, 0.0);

  std::vector<SurvivalRecord> records;
  records.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].time > 1.0) {
      throw ValueError("record " + std::to_string(i) +
                       ": normalized time must lie in [0,1]");
    }
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
        raw[i].covariates.data(), static_cast<Eigen::Index>(p));
    records.push_back(make_record(raw[i], raw[i].time, std::move(x), q));
  }
  return SurvivalDataset(std::move(records), q, static_cast<int>(p),
                         std::move(report));
}

SurvivalDataset apply_normalization(std::span<const RawRecord> raw, int q,
                                    const NormalizationReport& report) {
  require_nonempty(raw, q);
  const std::size_t p = common_dimension(raw);
  if (report.covariate_means.size() != p) {
    throw ShapeError("normalization report has " +
                     std::to_string(report.covariate_means.size()) +
                     " means, data has " + std::to_string(p) + " covariates");
  }
  if (!(report.time_scale > 0.0) || !(report.covariate_scale > 0.0)) {
    throw ConfigError("normalization scales must be positive");
  }
  std::vector<SurvivalRecord> records;
  records.reserve(raw.size());
  for (const RawRecord& r : raw) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
      x[static_cast<Eigen::Index>(j)] =
          (r.covariates[j] - report.covariate_means[j]) / report.covariate_scale;
    }
    const double norm = x.norm();
    if (norm > 1.0) x /= norm;
    records.push_back(make_record(r, r.time / report.time_scale, std::move(x), q));
  }
  return SurvivalDataset(std::move(records), q, static_cast<int>(p), report);
}

SurvivalDataset swap_record(const SurvivalDataset& ds, std::size_t index,
                            SurvivalRecord replacement) {
  if (index >= ds.size()) {
    throw BoundsError("swap index " + std::to_string(index) +
                      " out of range for dataset of size " +
                      std::to_string(ds.size()));
  }
  if (replacement.x.size() != ds.p()) {
    throw ShapeError("replacement has dimension " +
                     std::to_string(replacement.x.size()) + ", expected " +
                     std::to_string(ds.p()));
  }
  std::vector<SurvivalRecord> records = ds.records();
  records[index] = std::move(replacement);
  return SurvivalDataset(std::move(records), ds.q(), ds.p(), ds.normalization());
}

std::size_t record_distance(const SurvivalDataset& a, const SurvivalDataset& b) {
  if (a.size() != b.size()) {
    throw ShapeError("datasets differ in size");
  }
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) ++diff;
  }
  return diff;
}

}  // namespace dpsurv
