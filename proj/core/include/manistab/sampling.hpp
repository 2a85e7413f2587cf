#pragma once

#include <utility>
#include <vector>

#include "manistab/dynamics.hpp"
#include "manistab/manifold.hpp"

namespace manistab {

// Deterministic geodesic-polar sampling grid around the field's equilibrium:
// radii x directions x times, radii r_max*(i+1)/n_radii, directions uniform
// in chart angle, times uniform on [0, t_max].
struct GridSpec {
  int n_radii{32};
  int n_dirs{64};
  int n_times{8};
  double t_max{20.0};
  // <= 0 means auto: 0.9*r0 when the field's r0 is finite, otherwise 5.
  double r_max{0.0};
};

struct GridSample {
  double t;
  ManifoldPoint x;
};

std::vector<GridSample> polar_grid(const VectorField& field,
                                   const GridSpec& spec);

// Points on the geodesic sphere of radius r around x*, uniform in chart angle.
std::vector<ManifoldPoint> geodesic_ring(const VectorField& field, double r,
                                         int n_dirs);

}  // namespace manistab
