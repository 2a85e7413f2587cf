#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manistab/dynamics.hpp"
#include "manistab/manifold.hpp"
#include "manistab/sampling.hpp"

namespace manistab {

// Constants of the exponential-decay certificate:
//   k1 rho^a <= V <= k2 rho^a and Vdot <= -k3 rho^a.
struct ExpConstants {
  double k1;
  double k2;
  double k3;
  double a;
};

// Candidate certificate V with comparison functions W1 <= V <= W2 and decay
// floor W3. The W's vanish at the equilibrium and are positive away from it;
// that property is verified by sampling, not enforced at construction.
struct LyapunovCandidate {
  std::function<double(double, const ManifoldPoint&)> V;
  std::function<double(const ManifoldPoint&)> W1;
  std::function<double(const ManifoldPoint&)> W2;
  std::function<double(const ManifoldPoint&)> W3;
  std::optional<ExpConstants> exp_constants;
};

enum class Verdict { kPass, kFail, kInconclusive };

std::string to_string(Verdict v);

// Outcome of one numeric check. worst_margin >= 0 means the inequality held
// on every sample (margin = slack at the tightest sample); a failing check
// reports the worst violating sample as witness.
struct CheckReport {
  Verdict verdict{Verdict::kInconclusive};
  long n_samples{0};
  double worst_margin{0.0};
  std::optional<GridSample> witness;
  std::string details;
};

// JSON shape: {"verdict": "...", "n_samples": N, "worst_margin": m,
//              "witness": null | [t, coord_0, ...], "details": "..."}.
nlohmann::json to_json(const CheckReport& report);

// Sampled comparison-function bounds W1 <= V <= W2 over the grid; tolerance
// 1e-9 * (1 + |V|) per sample.
CheckReport check_sandwich(const LyapunovCandidate& cand,
                           const VectorField& field,
                           const std::vector<GridSample>& grid);

// Sampled decrease condition V_t + d_xV(f) <= -W3. V_t by central difference
// in t, d_xV(f) by central difference along the chart components of f; step
// 1e-6-scaled. Samples whose difference stencil exits the domain are skipped;
// more than 1% skipped makes the check inconclusive. Tolerance
// 1e-6 * (1 + |W3|) per sample.
CheckReport check_decrease(const LyapunovCandidate& cand,
                           const VectorField& field,
                           const std::vector<GridSample>& grid);

// Domain-of-attraction estimate {x in cl B_{x*}(r) : W2(x) <= c} with
// c = 0.99 * min_{rho = r} W1, the ring minimum refined by a local bracketed
// search around the argmin direction.
struct DoaEstimate {
  double r;
  double c;
  double ring_min;                          // the unscaled minimum of W1
  std::function<bool(const ManifoldPoint&)> member_test;
  std::vector<ManifoldPoint> sample_points; // members, for invariance probes
};

// RangeError when r >= field.domain_radius() or r >= injectivity radius.
DoaEstimate estimate_doa(const LyapunovCandidate& cand,
                         const VectorField& field, double r, int n_ring = 64);

// Properness of W1 (radial unboundedness when r0 = inf, barrier growth
// handled separately): evaluates min over 64 directions of W1 on a dyadic
// radius schedule and requires unbounded growth (final/first > 1e6 or a
// monotone doubling trend). On the half-plane the schedule is capped at the
// chart-safe radius.
CheckReport check_properness(const LyapunovCandidate& cand,
                             const VectorField& field);

// Finite-r0 barrier conditions: W1/(r0^2 - rho^2) proper as rho -> r0, and
// d_x rho^2(f) <= 0 on a sampling grid.
CheckReport check_barrier(const LyapunovCandidate& cand,
                          const VectorField& field,
                          const GridSpec& spec = {});

// Exponential-decay certificate on sampled trajectories:
//   rho(x(t), x*) <= (k2/k1)^{1/a} rho(x(t0), x*) e^{-k3/(a k2) (t - t0)}
// with multiplicative slack 1 + 1e-6. UsageError when exp_constants are
// missing or an initial state lies outside B_{x*}((k1/k2)^{1/a} r0).
CheckReport verify_exponential_bound(const LyapunovCandidate& cand,
                                     const VectorField& field,
                                     const std::vector<Trajectory>& trajs);

// Uniform attraction probe: integrates every (t0, x0) pair until
// rho(x(t), x*) < eps (budget t_budget), requires all runs to hit, the
// per-run sampled rho to be nonincreasing within 1e-9, and the hitting-time
// spread max/min <= 10 across t0 for each x0.
CheckReport verify_uniform_attraction(const VectorField& field,
                                      const std::vector<ManifoldPoint>& x0s,
                                      const std::vector<double>& t0s,
                                      double eps, double t_budget,
                                      double h0 = 1e-3);

}  // namespace manistab
