#include "manistab/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace manistab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPlaneFloor = 1e-12;  // x2 at or below this is off-chart
constexpr double kBaseMatchTol = 1e-12;

std::string kind_str(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::kEuclidean:
      return "euclidean";
    case ManifoldKind::kHalfPlaneHyperbolic:
      return "half_plane_hyperbolic";
    case ManifoldKind::kSphere:
      return "sphere";
  }
  return "unknown";
}

// Half-plane radicals shared by distance and log: p and q of the chord
// construction. p >= q >= 0 and p >= x2 + y2.
struct Chords {
  double p;
  double q;
};

Chords chords(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double dx = x(0) - y(0);
  return {std::hypot(dx, x(1) + y(1)), std::hypot(dx, x(1) - y(1))};
}

double half_plane_distance(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  const auto [p, q] = chords(x, y);
  // log-quotient form ln((p+q)/(p-q)) rewritten with p-q = 4 x2 y2 / (p+q)
  // so coincident points cost no cancellation.
  return 2.0 * std::log((p + q) / (2.0 * std::sqrt(x(1) * y(1))));
}

}  // namespace

double fd_step(const Eigen::VectorXd& xi) {
  return 1e-6 * std::max(1.0, xi.lpNorm<Eigen::Infinity>());
}

Manifold Manifold::euclidean(int n) {
  if (n < 1) throw UsageError("euclidean manifold needs dimension >= 1");
  return Manifold(ManifoldId{ManifoldKind::kEuclidean, n, 0.0});
}

Manifold Manifold::half_plane() {
  return Manifold(ManifoldId{ManifoldKind::kHalfPlaneHyperbolic, 2, 0.0});
}

Manifold Manifold::sphere(double radius) {
  if (!(radius > 0.0)) throw UsageError("sphere radius must be positive");
  return Manifold(ManifoldId{ManifoldKind::kSphere, 2, radius});
}

int Manifold::coord_size() const {
  return kind() == ManifoldKind::kSphere ? 3 : dimension();
}

std::string Manifold::name() const {
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return kind_str(kind()) + "(" + std::to_string(dimension()) + ")";
    case ManifoldKind::kHalfPlaneHyperbolic:
      return kind_str(kind());
    case ManifoldKind::kSphere:
      return kind_str(kind()) + "(R=" + std::to_string(id_.param) + ")";
  }
  return kind_str(kind());
}

bool Manifold::contains(const Eigen::VectorXd& coords) const {
  if (coords.size() != coord_size()) return false;
  if (!coords.allFinite()) return false;
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return true;
    case ManifoldKind::kHalfPlaneHyperbolic:
      return coords(1) > kHalfPlaneFloor;
    case ManifoldKind::kSphere:
      return std::abs(coords.norm() - 1.0) < 1e-9;
  }
  return false;
}

ManifoldPoint Manifold::point(Eigen::VectorXd coords) const {
  if (coords.size() != coord_size())
    throw UsageError("point has " + std::to_string(coords.size()) +
                     " coordinates, " + name() + " stores " +
                     std::to_string(coord_size()));
  if (!contains(coords))
    throw DomainError("coordinates outside the chart domain of " + name());
  return ManifoldPoint{std::move(coords), id_};
}

TangentVec Manifold::tangent(const ManifoldPoint& base,
                             Eigen::VectorXd comps) const {
  check_point(base);
  if (comps.size() != coord_size())
    throw UsageError("tangent components have wrong size for " + name());
  if (!comps.allFinite())
    throw UsageError("tangent components must be finite");
  if (kind() == ManifoldKind::kSphere &&
      std::abs(comps.dot(base.coords)) > 1e-9 * (1.0 + comps.norm()))
    throw UsageError("sphere tangent must be orthogonal to its base point");
  return TangentVec{base, std::move(comps)};
}

Covector Manifold::covector(const ManifoldPoint& base,
                            Eigen::VectorXd comps) const {
  check_point(base);
  if (comps.size() != coord_size())
    throw UsageError("covector components have wrong size for " + name());
  return Covector{base, std::move(comps)};
}

void Manifold::check_point(const ManifoldPoint& x) const {
  if (!(x.manifold == id_))
    throw UsageError("point belongs to a different manifold than " + name());
  if (!contains(x.coords))
    throw DomainError("point left the chart domain of " + name());
}

void Manifold::check_pair(const ManifoldPoint& x, const ManifoldPoint& y) const {
  check_point(x);
  check_point(y);
}

Eigen::MatrixXd Manifold::metric_at(const ManifoldPoint& x) const {
  check_point(x);
  const int n = coord_size();
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return Eigen::MatrixXd::Identity(n, n);
    case ManifoldKind::kHalfPlaneHyperbolic: {
      const double s = 1.0 / (x.coords(1) * x.coords(1));
      return s * Eigen::MatrixXd::Identity(2, 2);
    }
    case ManifoldKind::kSphere: {
      const double r2 = id_.param * id_.param;
      return r2 * Eigen::MatrixXd::Identity(3, 3);
    }
  }
  throw UsageError("unknown manifold kind");
}

double Manifold::inner(const TangentVec& X, const TangentVec& Y) const {
  check_point(X.base);
  if (!(Y.base.manifold == id_) ||
      (X.base.coords - Y.base.coords).lpNorm<Eigen::Infinity>() >
          kBaseMatchTol)
    throw UsageError("inner product needs tangents at the same base point");
  return X.comps.dot(metric_at(X.base) * Y.comps);
}

double Manifold::norm(const TangentVec& X) const {
  return std::sqrt(std::max(0.0, inner(X, X)));
}

double Manifold::distance(const ManifoldPoint& x, const ManifoldPoint& y) const {
  check_pair(x, y);
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return (x.coords - y.coords).norm();
    case ManifoldKind::kHalfPlaneHyperbolic:
      return half_plane_distance(x.coords, y.coords);
    case ManifoldKind::kSphere: {
      const double dot = x.coords.dot(y.coords);
      const double cross =
          Eigen::Vector3d(x.coords).cross(Eigen::Vector3d(y.coords)).norm();
      return id_.param * std::atan2(cross, dot);
    }
  }
  throw UsageError("unknown manifold kind");
}

ManifoldPoint Manifold::exp_map(const ManifoldPoint& x,
                                const TangentVec& X) const {
  check_point(x);
  if (!(X.base.manifold == id_) ||
      (X.base.coords - x.coords).lpNorm<Eigen::Infinity>() > kBaseMatchTol)
    throw UsageError("exp_map needs a tangent based at x");

  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return ManifoldPoint{x.coords + X.comps, id_};
    case ManifoldKind::kHalfPlaneHyperbolic: {
      const double x1 = x.coords(0);
      const double x2 = x.coords(1);
      const double s = X.comps.norm() / x2;  // metric norm
      if (s < 1e-300) return x;
      // Normalize x to i, map to the unit disk, run the radial geodesic,
      // map back. Written with explicit exp(+-s/2) so no tanh saturation
      // spoils large radii.
      const double psi = std::atan2(-X.comps(0), X.comps(1));
      const double c = std::cos(0.5 * psi);
      const double sb = std::sin(0.5 * psi);
      const double E = std::exp(0.5 * s);
      const double Ei = std::exp(-0.5 * s);
      const std::complex<double> N(c * E, -sb * Ei);
      const std::complex<double> D(c * Ei, -sb * E);
      const std::complex<double> z = std::complex<double>(0.0, 1.0) * N / D;
      Eigen::VectorXd out(2);
      out << x1 + x2 * z.real(), x2 * z.imag();
      if (!contains(out))
        throw DomainError(
            "geodesic endpoint is outside the representable chart");
      return ManifoldPoint{std::move(out), id_};
    }
    case ManifoldKind::kSphere: {
      const double alpha = X.comps.norm();  // embedding norm = angle
      if (alpha < 1e-300) return x;
      Eigen::VectorXd out =
          std::cos(alpha) * x.coords + std::sin(alpha) * (X.comps / alpha);
      out.normalize();
      return ManifoldPoint{std::move(out), id_};
    }
  }
  throw UsageError("unknown manifold kind");
}

TangentVec Manifold::log_map(const ManifoldPoint& x,
                             const ManifoldPoint& y) const {
  check_pair(x, y);
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return TangentVec{x, y.coords - x.coords};
    case ManifoldKind::kHalfPlaneHyperbolic: {
      // Horizontal translation is an isometry with identity tangent map, so
      // shift y onto the vertical axis and use the closed form toward (0, a).
      const double a = y.coords(1);
      const double u1 = x.coords(0) - y.coords(0);
      const double u2 = x.coords(1);
      const auto [p, q] = chords(x.coords, y.coords);
      if (q == 0.0) return TangentVec{x, Eigen::VectorXd::Zero(2)};
      const double rho = half_plane_distance(x.coords, y.coords);
      const double factor = -rho / (p * q);
      Eigen::VectorXd comps(2);
      comps << factor * (2.0 * u1 * u2 * u2),
          factor * (u2 * (u2 * u2 - u1 * u1 - a * a));
      return TangentVec{x, std::move(comps)};
    }
    case ManifoldKind::kSphere: {
      const double dot = x.coords.dot(y.coords);
      Eigen::VectorXd proj = y.coords - dot * x.coords;
      const double pn = proj.norm();
      const double alpha = std::atan2(pn, dot);
      if (alpha > std::numbers::pi - 1e-9)
        throw RangeError(
            "log_map target at or beyond the injectivity radius (antipodal)");
      if (pn < 1e-300) return TangentVec{x, Eigen::VectorXd::Zero(3)};
      return TangentVec{x, (alpha / pn) * proj};
    }
  }
  throw UsageError("unknown manifold kind");
}

TangentVec Manifold::log_via_distance_gradient(const ManifoldPoint& x,
                                               const ManifoldPoint& y) const {
  check_pair(x, y);
  if (kind() == ManifoldKind::kSphere)
    throw UsageError(
        "distance-gradient log differentiates chart coordinates; the embedded "
        "sphere has none");
  const int n = coord_size();
  const double h = fd_step(x.coords);
  Eigen::VectorXd a(n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd fwd = x.coords;
    Eigen::VectorXd bwd = x.coords;
    fwd(j) += h;
    bwd(j) -= h;
    if (!contains(fwd) || !contains(bwd))
      throw DomainError("finite-difference stencil escapes the chart");
    const double df = distance(ManifoldPoint{fwd, id_}, y);
    const double db = distance(ManifoldPoint{bwd, id_}, y);
    a(j) = (df * df - db * db) / (2.0 * h);
  }
  Eigen::MatrixXd G = metric_at(x);
  Eigen::VectorXd comps = -0.5 * G.llt().solve(a);
  return TangentVec{x, std::move(comps)};
}

Covector Manifold::flat(const TangentVec& X) const {
  check_point(X.base);
  return Covector{X.base, metric_at(X.base) * X.comps};
}

TangentVec Manifold::sharp(const Covector& eta) const {
  check_point(eta.base);
  Eigen::MatrixXd G = metric_at(eta.base);
  return TangentVec{eta.base, G.llt().solve(eta.comps)};
}

ManifoldPoint Manifold::geodesic_shoot(const ManifoldPoint& x,
                                       const TangentVec& X,
                                       int n_steps) const {
  check_point(x);
  if (kind() == ManifoldKind::kSphere)
    throw UsageError("geodesic_shoot integrates chart coordinates; the "
                     "embedded sphere has none");
  if (n_steps < 1) throw UsageError("geodesic_shoot needs n_steps >= 1");
  if (!(X.base.manifold == id_) ||
      (X.base.coords - x.coords).lpNorm<Eigen::Infinity>() > kBaseMatchTol)
    throw UsageError("geodesic_shoot needs a tangent based at x");

  const int n = coord_size();

  auto metric_raw = [&](const Eigen::VectorXd& xi) -> Eigen::MatrixXd {
    if (!contains(xi))
      throw DomainError("geodesic integration left the chart");
    return metric_at(ManifoldPoint{xi, id_});
  };

  // Geodesic acceleration from finite-difference Christoffel symbols; the
  // metric is the only input, which keeps this independent of exp_map.
  auto accel = [&](const Eigen::VectorXd& xi,
                   const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const double h = fd_step(xi);
    std::vector<Eigen::MatrixXd> dG(n);
    for (int l = 0; l < n; ++l) {
      Eigen::VectorXd fwd = xi;
      Eigen::VectorXd bwd = xi;
      fwd(l) += h;
      bwd(l) -= h;
      dG[l] = (metric_raw(fwd) - metric_raw(bwd)) / (2.0 * h);
    }
    Eigen::MatrixXd G = metric_raw(xi);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    Eigen::VectorXd rhs(n);
    for (int l = 0; l < n; ++l) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          sum += (dG[j](l, k) + dG[k](l, j) - dG[l](j, k)) * v(j) * v(k);
      rhs(l) = -0.5 * sum;
    }
    return llt.solve(rhs);
  };

  Eigen::VectorXd xi = x.coords;
  Eigen::VectorXd v = X.comps;
  const double h = 1.0 / n_steps;
  for (int step = 0; step < n_steps; ++step) {
    // RK4 on the first-order system (xi, v).
    const Eigen::VectorXd k1x = v, k1v = accel(xi, v);
    const Eigen::VectorXd k2x = v + 0.5 * h * k1v,
                          k2v = accel(xi + 0.5 * h * k1x, v + 0.5 * h * k1v);
    const Eigen::VectorXd k3x = v + 0.5 * h * k2v,
                          k3v = accel(xi + 0.5 * h * k2x, v + 0.5 * h * k2v);
    const Eigen::VectorXd k4x = v + h * k3v,
                          k4v = accel(xi + h * k3x, v + h * k3v);
    xi += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return point(std::move(xi));
}

double Manifold::sectional_curvature(const ManifoldPoint& x) const {
  check_point(x);
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return 0.0;
    case ManifoldKind::kHalfPlaneHyperbolic:
      return -1.0;
    case ManifoldKind::kSphere:
      return 1.0 / (id_.param * id_.param);
  }
  throw UsageError("unknown manifold kind");
}

double Manifold::injectivity_radius(const ManifoldPoint& x) const {
  check_point(x);
  switch (kind()) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kHalfPlaneHyperbolic:
      return kInf;
    case ManifoldKind::kSphere:
      return std::numbers::pi * id_.param;
  }
  throw UsageError("unknown manifold kind");
}

double Manifold::max_safe_radius(const ManifoldPoint& base) const {
  check_point(base);
  switch (kind()) {
    case ManifoldKind::kEuclidean:
      return 1e150;
    case ManifoldKind::kHalfPlaneHyperbolic: {
      // height scales like x2 e^{+-rho}: stay above the chart floor going
      // down and inside double range going up
      const double x2 = base.coords(1);
      const double down = std::log(x2 / kHalfPlaneFloor);
      const double up = std::log(1e300 / x2);
      return 0.9 * std::min(down, up);
    }
    case ManifoldKind::kSphere:
      return kInf;
  }
  return kInf;
}

TangentVec Manifold::unit_direction(const ManifoldPoint& base,
                                    double theta) const {
  check_point(base);
  switch (kind()) {
    case ManifoldKind::kEuclidean: {
      if (dimension() < 2)
        throw UsageError("unit_direction needs dimension >= 2");
      Eigen::VectorXd comps = Eigen::VectorXd::Zero(dimension());
      comps(0) = std::cos(theta);
      comps(1) = std::sin(theta);
      return TangentVec{base, std::move(comps)};
    }
    case ManifoldKind::kHalfPlaneHyperbolic: {
      Eigen::VectorXd comps(2);
      comps << std::cos(theta), std::sin(theta);
      comps *= base.coords(1);  // metric normalization
      return TangentVec{base, std::move(comps)};
    }
    case ManifoldKind::kSphere: {
      // orthonormal frame in the tangent plane, scaled to unit metric norm
      Eigen::Vector3d nrm = base.coords;
      Eigen::Index smallest = 0;
      nrm.cwiseAbs().minCoeff(&smallest);
      Eigen::Vector3d e1 =
          nrm.cross(Eigen::Vector3d::Unit(smallest)).normalized();
      Eigen::Vector3d e2 = nrm.cross(e1).normalized();
      Eigen::Vector3d comps =
          (std::cos(theta) * e1 + std::sin(theta) * e2) / id_.param;
      return TangentVec{base, comps};
    }
  }
  throw UsageError("unknown manifold kind");
}

}  // namespace manistab
