#pragma once

#include <stdexcept>
#include <string>

namespace mcl {

/// Bad input: malformed config, out-of-range parameter, wrong dimensions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact solver failed to converge within its iteration budget.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ActionNotAllowed : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDataset : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace mcl
