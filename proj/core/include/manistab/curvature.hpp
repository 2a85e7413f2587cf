#pragma once

#include <optional>

#include "manistab/manifold.hpp"

namespace manistab {

// User-supplied curvature information for the injectivity-radius estimate.
// sigma/delta are sectional-curvature bounds sigma <= K <= delta where given.
struct CurvatureBounds {
  std::optional<double> sigma;
  std::optional<double> delta;
  bool nonpositive{false};
  bool compact{false};
  std::optional<double> shortest_loop_length;
};

struct RadiusInterval {
  double lower{0.0};
  double upper{0.0};
};

// Certified interval for the injectivity radius from curvature bounds.
// Clauses, in precedence order when several apply:
//   (iii) nonpositive curvature            -> [inf, inf]
//   (i)   0 < delta/4 < sigma <= K <= delta -> [pi/sqrt(delta), pi/sqrt(sigma)]
//   (ii)  compact, K <= delta, loop length  -> [min(pi/sqrt(delta), loop/2), inf]
// Throws InapplicableError when no clause applies, UsageError on sigma > delta.
RadiusInterval injectivity_interval(const CurvatureBounds& bounds);

}  // namespace manistab
