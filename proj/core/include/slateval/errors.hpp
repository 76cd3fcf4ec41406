#pragma once

#include <stdexcept>
#include <string>

namespace slateval {

/// Raised when input data (logs, worlds, configs) violates a structural
/// requirement. The message names the offending record where possible.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an estimator cannot produce a value on the given data,
/// e.g. the target policy puts zero mass on every logged slate.
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slateval
