#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manistab/dynamics.hpp"
#include "manistab/lyapunov.hpp"

namespace manistab {

// Time coefficient d(t) of the benchmark fields; bounded below by k > 0.
class DCoefficient {
 public:
  static DCoefficient constant(double c);
  static DCoefficient two_plus_sin();  // d(t) = 2 + sin t, k = 1

  double operator()(double t) const;
  double lower_bound() const { return k_; }
  bool is_constant() const { return constant_; }
  double constant_value() const { return value_; }

 private:
  DCoefficient(bool constant, double value, double k)
      : constant_(constant), value_(value), k_(k) {}

  bool constant_;
  double value_;
  double k_;
};

struct RunParams {
  double t_max{50.0};
  double h0{1e-3};
  double eps{1e-3};
  double t_budget{200.0};
  std::vector<double> t0_list;        // default 0..10
  std::vector<ManifoldPoint> x0_list; // default 8 points on two spheres
};

// A fully wired experiment: manifold, field, candidate certificate, run
// parameters, and the list of checks the scenario claims to pass.
struct Scenario {
  std::string name;
  Manifold manifold;
  VectorField field;
  LyapunovCandidate candidate;
  RunParams run;
  std::vector<std::string> claims;
  std::vector<std::string> warnings;  // defaulting notices from the loader
  // Exact solution when available (linear oracle), for error measurement.
  std::optional<std::function<Eigen::VectorXd(double t0,
                                              const Eigen::VectorXd& x0,
                                              double t)>>
      exact;
  nlohmann::json config;  // resolved config; serialize() returns this
};

// Upper half-plane with the hyperbolic metric, equilibrium A = (0, a),
//   f1 = -2 d(t) x1 x2^2,  f2 = d(t) x2 (a^2 + x1^2 - x2^2),
// V = W1 = W2 = rho^2(., A), W3 the closed-form decay floor with k = the
// lower bound of d; r0 = inf.
Scenario build_example_hyperbolic(double a, const DCoefficient& d);

// Same chart and same field, flat metric; V = W1 = W2 = |x - A|^2,
// W3 = 2 k x2 (x2 + a)(x1^2 + (x2 - a)^2); r0 = the Euclidean distance from
// A to the chart boundary, i.e. a.
Scenario build_example_euclidean(double a,
                                 const DCoefficient& d =
                                     DCoefficient::two_plus_sin());

// xdot = -lambda x on R^n with V = |x|^2 and exp constants
// (k1, k2, k3, a) = (1, 1, 2 lambda, 2); exact solution attached.
Scenario build_linear_oracle(int n, double lambda);

// f == 0 on R^n; V = W1 = W2 = |x|^2, W3 == 0. Constant-distance baseline.
Scenario build_zero_field(int n);

// Strict JSON config loader. Unknown keys are rejected with their path;
// missing run parameters are defaulted with a warning recorded on the
// scenario. Throws ConfigError.
Scenario load_scenario(const std::string& config_text);

// Resolved config of a scenario; load_scenario(serialize_scenario(s)) builds
// an equivalent scenario.
std::string serialize_scenario(const Scenario& s);

// Default initial-state grid of a template: 8 points on two geodesic spheres
// around the equilibrium.
std::vector<ManifoldPoint> default_x0_grid(const VectorField& field,
                                           double r_inner, double r_outer);

}  // namespace manistab
