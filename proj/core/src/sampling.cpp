#include "manistab/sampling.hpp"

#include <cmath>
#include <numbers>

namespace manistab {

namespace {

// Ring directions handle the 1-dimensional case (two rays) so the linear
// oracle can use the same grids.
std::vector<TangentVec> ring_directions(const Manifold& m,
                                        const ManifoldPoint& center,
                                        int n_dirs) {
  if (n_dirs < 1) throw UsageError("sampling needs n_dirs >= 1");
  std::vector<TangentVec> dirs;
  if (m.kind() == ManifoldKind::kEuclidean && m.dimension() == 1) {
    dirs.push_back(m.tangent(center, Eigen::VectorXd::Constant(1, 1.0)));
    dirs.push_back(m.tangent(center, Eigen::VectorXd::Constant(1, -1.0)));
    return dirs;
  }
  dirs.reserve(n_dirs);
  for (int j = 0; j < n_dirs; ++j)
    dirs.push_back(
        m.unit_direction(center, 2.0 * std::numbers::pi * j / n_dirs));
  return dirs;
}

}  // namespace

std::vector<ManifoldPoint> geodesic_ring(const VectorField& field, double r,
                                         int n_dirs) {
  if (!(r > 0.0)) throw UsageError("ring radius must be positive");
  const Manifold& m = field.manifold();
  const ManifoldPoint& xs = field.equilibrium();
  std::vector<ManifoldPoint> ring;
  for (const TangentVec& u : ring_directions(m, xs, n_dirs))
    ring.push_back(m.exp_map(xs, TangentVec{xs, r * u.comps}));
  return ring;
}

std::vector<GridSample> polar_grid(const VectorField& field,
                                   const GridSpec& spec) {
  if (spec.n_radii < 1 || spec.n_dirs < 1 || spec.n_times < 1)
    throw UsageError("grid spec needs positive counts");
  if (spec.t_max < 0.0) throw UsageError("grid t_max must be nonnegative");

  const Manifold& m = field.manifold();
  const ManifoldPoint& xs = field.equilibrium();

  double r_max = spec.r_max;
  if (!(r_max > 0.0)) {
    r_max = std::isinf(field.domain_radius()) ? 5.0
                                              : 0.9 * field.domain_radius();
  }
  r_max = std::min(r_max, 0.999 * m.injectivity_radius(xs));
  r_max = std::min(r_max, m.max_safe_radius(xs));

  // the spatial layer is time-independent; build it once
  std::vector<ManifoldPoint> points;
  const auto dirs = ring_directions(m, xs, spec.n_dirs);
  for (int i = 0; i < spec.n_radii; ++i) {
    const double r = r_max * (i + 1) / spec.n_radii;
    for (const TangentVec& u : dirs)
      points.push_back(m.exp_map(xs, TangentVec{xs, r * u.comps}));
  }

  std::vector<GridSample> grid;
  grid.reserve(points.size() * spec.n_times);
  for (int j = 0; j < spec.n_times; ++j) {
    const double t = spec.n_times == 1
                         ? 0.0
                         : spec.t_max * j / (spec.n_times - 1);
    for (const ManifoldPoint& x : points) grid.push_back(GridSample{t, x});
  }
  return grid;
}

}  // namespace manistab
