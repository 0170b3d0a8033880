#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chkp {

/// Invalid physical or numerical parameters (c <= 2 kappa, n < 8, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A grid function was passed with the wrong parity tag or size.
class ParityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or direct solver failed. Carries the residual history when
/// one exists so callers can report it.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const { return history_; }
  double final_residual() const { return history_.empty() ? -1.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

}  // namespace chkp
