#include "manistab/curvature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace manistab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RadiusInterval injectivity_interval(const CurvatureBounds& b) {
  if (b.sigma && b.delta && *b.sigma > *b.delta)
    throw UsageError("curvature bounds need sigma <= delta");
  if (b.shortest_loop_length && !(*b.shortest_loop_length > 0.0))
    throw UsageError("shortest closed-geodesic length must be positive");

  if (b.nonpositive) return RadiusInterval{kInf, kInf};

  // pinched positive curvature: 0 < delta/4 < sigma <= K <= delta
  if (b.sigma && b.delta) {
    const double sigma = *b.sigma;
    const double delta = *b.delta;
    if (delta > 0.0 && sigma > 0.25 * delta && sigma <= delta) {
      return RadiusInterval{std::numbers::pi / std::sqrt(delta),
                            std::numbers::pi / std::sqrt(sigma)};
    }
  }

  // compact with an upper curvature bound and a known shortest loop
  if (b.compact && b.delta && b.shortest_loop_length) {
    const double delta = *b.delta;
    const double half_loop = 0.5 * *b.shortest_loop_length;
    const double conj =
        delta > 0.0 ? std::numbers::pi / std::sqrt(delta) : kInf;
    return RadiusInterval{std::min(conj, half_loop), kInf};
  }

  throw InapplicableError(
      "inapplicable: no injectivity clause matches the supplied bounds");
}

}  // namespace manistab
