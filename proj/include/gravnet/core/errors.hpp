#pragma once

#include <stdexcept>
#include <string>

namespace gravnet {

// Input or precondition violation. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Correlation with a zero-variance side.
class UndefinedCorrelationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Design columns that are (numerically) spanned by the absorbed factors or
// by each other.
class CollinearityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Nothing left to estimate (e.g. every row explained by fixed effects).
// Maps to CLI exit code 3.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system / read / write failures. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gravnet
