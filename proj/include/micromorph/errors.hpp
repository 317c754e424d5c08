#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace micromorph {

/// Bad input: parameters, configs or documents that fail validation.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mixed or incompatible coefficient domains / truncations.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular systems, resonant divisors, bad brackets.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iteration ran out of budget; carries the residual history.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), log(std::move(history)) {}
  std::vector<double> log;
};

}  // namespace micromorph
