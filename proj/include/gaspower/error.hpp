#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaspower {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: malformed files, invalid topology, out-of-domain arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A compressor operating point outside the range of the cost model (reverse flow or
/// outlet pressure below inlet pressure).
class OperatingRangeError : public InputError {
 public:
  using InputError::InputError;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class MaxIterationsExceeded : public SolverError {
 public:
  MaxIterationsExceeded(const std::string& what, double last_residual)
      : SolverError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class SingularJacobian : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A simulation step failed; carries the index of the time level that could not be reached.
class StepFailure : public SolverError {
 public:
  StepFailure(const std::string& what, std::size_t time_index)
      : SolverError(what), time_index_(time_index) {}
  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::size_t time_index_;
};

class NoFeasibleStart : public SolverError {
 public:
  using SolverError::SolverError;
};

class InnerStall : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace gaspower
