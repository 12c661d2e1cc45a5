#pragma once

#include <stdexcept>
#include <string>

namespace netdep {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (out-of-range sizes, malformed inputs, bad files).
struct ParameterError : Error {
  explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// A documented precondition of an operation was violated by the caller.
struct ContractError : Error {
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// A matrix that must be nonsingular is singular (or rho left its feasible range).
struct SingularityError : Error {
  explicit SingularityError(const std::string& msg) : Error(msg) {}
};

// A matrix that must be positive definite is not.
struct DefinitenessError : Error {
  explicit DefinitenessError(const std::string& msg) : Error(msg) {}
};

// Network carries no usable structure (e.g. all-zero weight matrix).
struct DegenerateNetworkError : ParameterError {
  explicit DegenerateNetworkError(const std::string& msg) : ParameterError(msg) {}
};

// Regressor carries no variation.
struct DegenerateRegressorError : ParameterError {
  explicit DegenerateRegressorError(const std::string& msg) : ParameterError(msg) {}
};

}  // namespace netdep
