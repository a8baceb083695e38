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

#ifndef DPSURV_ERRORS_HPP_
#define DPSURV_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpsurv {

// Root of every exception thrown by the library. The CLI maps subclasses
// derived from UsageError to exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or configuration: the caller can fix it.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

// A required CSV column or JSON field is missing.
class SchemaError : public UsageError {
 public:
  using UsageError::UsageError;
};

// A cell could not be parsed as a number. Carries the 1-based data row.
class ParseError : public UsageError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : UsageError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// A parsed value lies outside its allowed set (e.g. event not in {0,1}).
class ValueError : public UsageError {
 public:
  ValueError(const std::string& what, std::size_t row = 0)
      : UsageError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class EmptyDatasetError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ShapeError : public UsageError {
 public:
  using UsageError::UsageError;
};

class BoundsError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DomainError : public UsageError {
 public:
  using UsageError::UsageError;
};

class IoError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Non-finite values or failed convergence during a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The Langevin chain produced a non-finite state.
class ChainError : public NumericError {
 public:
  ChainError(const std::string& what, std::size_t step)
      : NumericError(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpsurv

#endif  // DPSURV_ERRORS_HPP_
