#pragma once

#include <Eigen/Core>

#include <string>

#include "manistab/errors.hpp"

namespace manistab {

enum class ManifoldKind {
  kEuclidean,           // R^n, flat metric
  kHalfPlaneHyperbolic, // upper half-plane {x2 > 0}, g_ij = delta_ij / x2^2
  kSphere,              // round sphere of radius R, stored as unit 3-vectors
};

// Identifies a manifold instance; points carry one so cross-manifold mixing is
// caught at the API boundary.
struct ManifoldId {
  ManifoldKind kind{ManifoldKind::kEuclidean};
  int dimension{0};
  double param{0.0};  // sphere radius; unused otherwise

  bool operator==(const ManifoldId&) const = default;
};

struct ManifoldPoint {
  Eigen::VectorXd coords;
  ManifoldId manifold;
};

// Tangent vector in chart-basis components, attached to its base point.
struct TangentVec {
  ManifoldPoint base;
  Eigen::VectorXd comps;
};

// Covector (differential) in the dual chart basis.
struct Covector {
  ManifoldPoint base;
  Eigen::VectorXd comps;
};

// Chart-coordinate description of one of the built-in Riemannian manifolds.
// All operations are pure; invalid inputs raise the exceptions in errors.hpp.
class Manifold {
 public:
  static Manifold euclidean(int n);
  static Manifold half_plane();
  static Manifold sphere(double radius);

  ManifoldKind kind() const { return id_.kind; }
  int dimension() const { return id_.dimension; }
  // Length of stored coordinate vectors; equals dimension() except for the
  // sphere, whose points are unit vectors in R^3.
  int coord_size() const;
  const ManifoldId& id() const { return id_; }
  double sphere_radius() const { return id_.param; }
  std::string name() const;

  // Chart-domain membership for raw coordinates (half-plane requires
  // x2 > 1e-12; sphere requires |coords| = 1 within 1e-9).
  bool contains(const Eigen::VectorXd& coords) const;

  // Validated constructors; throw DomainError / UsageError.
  ManifoldPoint point(Eigen::VectorXd coords) const;
  TangentVec tangent(const ManifoldPoint& base, Eigen::VectorXd comps) const;
  Covector covector(const ManifoldPoint& base, Eigen::VectorXd comps) const;

  // Metric matrix G(x); symmetric positive definite.
  Eigen::MatrixXd metric_at(const ManifoldPoint& x) const;

  // <X, Y>_g at the common base point; UsageError if bases differ.
  double inner(const TangentVec& X, const TangentVec& Y) const;
  double norm(const TangentVec& X) const;

  // Geodesic distance. Closed form for every kind.
  double distance(const ManifoldPoint& x, const ManifoldPoint& y) const;

  // exp_x(X); domain errors only (the result is always on the manifold).
  ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVec& X) const;

  // exp_x^{-1}(y); requires distance(x, y) < injectivity_radius(x).
  TangentVec log_map(const ManifoldPoint& x, const ManifoldPoint& y) const;

  // Independent log route: -1/2 G^{-1}(x) grad_x rho^2(x, y), the gradient
  // taken by central finite differences in chart coordinates. Not available
  // on the sphere (embedding coordinates are constrained).
  TangentVec log_via_distance_gradient(const ManifoldPoint& x,
                                       const ManifoldPoint& y) const;

  // Musical isomorphisms: flat lowers with G, sharp raises with G^{-1}.
  Covector flat(const TangentVec& X) const;
  TangentVec sharp(const Covector& eta) const;

  // Numeric exponential map: integrates the geodesic equation with RK4 over
  // n_steps, Christoffel symbols from finite differences of the metric.
  // Serves as an oracle for exp_map; not available on the sphere.
  ManifoldPoint geodesic_shoot(const ManifoldPoint& x, const TangentVec& X,
                               int n_steps) const;

  // Constant sectional curvature of the built-in kinds.
  double sectional_curvature(const ManifoldPoint& x) const;

  // +inf for Euclidean and half-plane, pi*R for the sphere.
  double injectivity_radius(const ManifoldPoint& x) const;

  // Largest geodesic radius around base whose exp image stays representable
  // in chart coordinates (half-plane heights scale like x2 e^{+-rho}, bounded
  // by the chart floor below and double range above).
  double max_safe_radius(const ManifoldPoint& base) const;

  // Unit-norm tangent at base in the direction of chart angle theta
  // (2-dimensional kinds only; the sphere uses an orthonormal frame).
  TangentVec unit_direction(const ManifoldPoint& base, double theta) const;

 private:
  explicit Manifold(ManifoldId id) : id_(id) {}

  void check_point(const ManifoldPoint& x) const;
  void check_pair(const ManifoldPoint& x, const ManifoldPoint& y) const;

  ManifoldId id_;
};

// Step scale for all central differences: 1e-6 * max(1, |xi|_inf).
double fd_step(const Eigen::VectorXd& xi);

}  // namespace manistab
