#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "manistab/manifold.hpp"

namespace manistab {

// Time-dependent vector field f(t, x) on a manifold, given in chart-basis
// components. Carries its equilibrium x* and the radius r0 of the geodesic
// ball around x* on which the field is studied (inf when unrestricted).
// The equilibrium is checked at construction: |f(t, x*)|_g < 1e-12 for
// t in {0, 0.1, 1, 10, 100}.
class VectorField {
 public:
  using EvalFn =
      std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

  VectorField(Manifold manifold, EvalFn eval, ManifoldPoint equilibrium,
              double domain_radius = std::numeric_limits<double>::infinity());

  const Manifold& manifold() const { return manifold_; }
  const ManifoldPoint& equilibrium() const { return equilibrium_; }
  double domain_radius() const { return domain_radius_; }

  // True when coords are in the chart and, for finite r0, within the open
  // geodesic ball B_{x*}(r0).
  bool in_domain(const Eigen::VectorXd& coords) const;

  // Checked evaluation; DomainError off-domain, UsageError for t < 0.
  TangentVec operator()(double t, const ManifoldPoint& x) const;
  Eigen::VectorXd eval_comps(double t, const Eigen::VectorXd& coords) const;

 private:
  Manifold manifold_;
  EvalFn eval_;
  ManifoldPoint equilibrium_;
  double domain_radius_;
};

// Sampled solution curve. Sample k sits at times()[k] with chart coordinates
// coords().row(k); every sample is inside the chart domain.
class Trajectory {
 public:
  Trajectory(const Manifold& manifold, std::vector<double> times,
             Eigen::MatrixXd coords, std::string integrator_tag);

  const std::vector<double>& times() const { return times_; }
  const Eigen::MatrixXd& coords() const { return coords_; }
  int size() const { return static_cast<int>(times_.size()); }
  double t0() const { return times_.front(); }
  const ManifoldId& manifold_id() const { return manifold_id_; }
  const std::string& integrator_tag() const { return integrator_tag_; }

  ManifoldPoint point(int k) const;

 private:
  ManifoldId manifold_id_;
  std::vector<double> times_;
  Eigen::MatrixXd coords_;  // one row per sample
  std::string integrator_tag_;
};

// Classic fixed-step RK4 on chart coordinates, sampled at t0 + k*h0. Steps
// that leave the chart (or the r0 ball) are retried at half the size; a
// rejection cascade deeper than 40 raises IntegrationError (boundary exit)
// or StiffnessError (non-finite values).
Trajectory integrate_chart(const VectorField& field, double t0,
                           const ManifoldPoint& x0, double t_max, double h0);

// Pullback of the field to the fixed tangent space at x*:
//   F(t, X) = d(exp_{x*}^{-1})|_{exp_{x*} X} f(t, exp_{x*} X),
// the differential taken as the chart Jacobian of y -> log_{x*}(y) by central
// finite differences. X must be based at the field's equilibrium.
TangentVec pullback_field(const VectorField& field, double t,
                          const TangentVec& X);

// Integrates Xdot = F(t, X) in the tangent space at x* and maps the samples
// back with exp_{x*}; same grid and rejection policy as integrate_chart.
Trajectory integrate_pullback(const VectorField& field, double t0,
                              const ManifoldPoint& x0, double t_max,
                              double h0);

// Radial compactification of the open ball B_{x*}(r0) in the tangent space:
//   phi(X)     = X / (r0 - |X|),      |X| < r0,
//   phi^{-1}(Y)= r0 Y / (1 + |Y|),
// norms taken in the metric at the base point. RangeError when |X| >= r0.
TangentVec compactify(const Manifold& m, const TangentVec& X, double r0);
TangentVec decompactify(const Manifold& m, const TangentVec& Y, double r0);

// Integrates the compactified pullback system Ydot = dphi(F) and maps samples
// back through phi^{-1} and exp_{x*}. Requires x0 in B_{x*}(r0) with finite
// r0 below the injectivity radius. Every emitted sample satisfies rho < r0 by
// construction.
Trajectory integrate_compactified(const VectorField& field, double t0,
                                  const ManifoldPoint& x0, double t_max,
                                  double h0, double r0);

// Outcome of stepping a run until rho(x(t), x*) < eps or the budget is spent.
// max_rho_uptick records the largest increase between consecutive sampled
// distances (0 for a monotone run); used by the attraction checks.
struct ProbeResult {
  bool hit{false};
  double t_hit{0.0};       // absolute time of the first sample below eps
  double initial_rho{0.0};
  double final_rho{0.0};
  double max_rho_uptick{0.0};
};

// Chart integration without trajectory storage; same stepping policy as
// integrate_chart, checked at every grid time t0 + k*h0.
ProbeResult probe_convergence(const VectorField& field, double t0,
                              const ManifoldPoint& x0, double eps,
                              double t_budget, double h0);

// CSV serialization: header "t,coord_0,...,coord_{n-1}", one row per sample,
// 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace manistab
