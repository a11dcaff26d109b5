#pragma once

#include <stdexcept>
#include <string>

namespace perosim {

/// Non-finite argument passed to a statistics function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside the open range of a statistics function. `bound()` names
/// the violated endpoint ("lower" or "upper").
class RangeError : public std::range_error {
 public:
  RangeError(const std::string& what, std::string bound)
      : std::range_error(what), bound_(std::move(bound)) {}
  const std::string& bound() const noexcept { return bound_; }

 private:
  std::string bound_;
};

/// Rejected configuration. `field()` is the offending key (JSON pointer when
/// the error comes from a config file).
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SchemeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for recoverable step failures; the transient driver retries with a
/// smaller time step.
class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NewtonDiverged : public StepError {
 public:
  using StepError::StepError;
};

class BoundsBreach : public StepError {
 public:
  using StepError::StepError;
};

class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContinuationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perosim
