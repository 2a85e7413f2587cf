#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace manistab {

// Evaluation point left the chart domain (e.g. half-plane x2 <= 1e-12) or the
// vector field's domain ball.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// API misuse: mismatched base points, wrong dimensions, unsupported kind.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Geometric quantity outside its validity range (injectivity radius, r0 ball).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Integrator hit the chart boundary and could not continue; carries the last
// valid state and the time it was reached.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t_last,
                   std::vector<double> state_last)
      : std::runtime_error(what),
        t_last_(t_last),
        state_last_(std::move(state_last)) {}

  double t_last() const { return t_last_; }
  const std::vector<double>& state_last() const { return state_last_; }

 private:
  double t_last_;
  std::vector<double> state_last_;
};

// Step-size underflow while the state stayed finite-looking locally; the step
// could not be completed at any admissible size.
class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// None of the injectivity-interval clauses applies to the supplied bounds.
class InapplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario config rejected; field_path names the offending key when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string field_path = "")
      : std::runtime_error(what), field_path_(std::move(field_path)) {}

  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace manistab
