#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace statopt {

// Bad inputs: ranges, shapes, unsupported combinations. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical step could not be carried out (singular Hessian, non-finite value).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the iteration driver; records which iteration produced the failure.
class IterationError : public NumericalError {
 public:
  IterationError(std::size_t iteration, const std::string& what)
      : NumericalError("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Bracketing or other solver precondition failed at run time.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace statopt
