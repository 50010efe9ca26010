#pragma once

#include <stdexcept>
#include <string>

namespace polyq {

// Malformed user input: bad file contents, inconsistent dimensions,
// out-of-range parameters. Maps to CLI exit code 1.
class invalid_input : public std::invalid_argument {
 public:
  explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// A strategy left the domain the dynamics are defined on (a probability
// dropped below the representable floor). Maps to CLI exit code 1.
class boundary_error : public std::domain_error {
 public:
  explicit boundary_error(const std::string& what) : std::domain_error(what) {}
};

// The integrator produced a non-finite state. Carries the last time at which
// the state was still valid. Maps to CLI exit code 2.
class integration_error : public std::runtime_error {
 public:
  integration_error(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

// An iterative solver ran out of budget. Carries the residual it got stuck
// at. Maps to CLI exit code 2.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace polyq
