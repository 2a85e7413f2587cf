#pragma once

#include <Eigen/Core>

#include <random>

// Deterministic sample generators shared by the unit and acceptance suites.
// Everything is seeded; reruns of one binary see identical draws.
namespace testsupport {

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  // Log-uniform, handy for half-plane heights.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  Eigen::Vector2d half_plane_point(double x1_span = 3.0, double x2_lo = 0.3,
                                   double x2_hi = 4.0) {
    return {uniform(-x1_span, x1_span), log_uniform(x2_lo, x2_hi)};
  }

  double angle() { return uniform(0.0, 2.0 * 3.14159265358979323846); }

 private:
  std::mt19937 gen_;
};

}  // namespace testsupport
