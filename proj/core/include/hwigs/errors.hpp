#pragma once

#include <stdexcept>
#include <string>

namespace hwigs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, out-of-range parameters, malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Singular or ill-conditioned matrices, non-finite objective values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// QoS thresholds that no feasible covariance set can meet.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwigs
