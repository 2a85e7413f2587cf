#include "manistab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace manistab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// d/dt V(t, x) with the stencil kept inside t >= 0: central when possible,
// second-order forward otherwise.
double time_derivative(const LyapunovCandidate& cand, double t,
                       const ManifoldPoint& x) {
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  if (t >= h) {
    return (cand.V(t + h, x) - cand.V(t - h, x)) / (2.0 * h);
  }
  // One-sided second-order stencil at the time boundary, written as a
  // combination of forward differences so a time-independent V yields an
  // exact zero instead of cancellation noise.
  const double v0 = cand.V(t, x);
  const double d1 = cand.V(t + h, x) - v0;
  const double d2 = cand.V(t + 2.0 * h, x) - v0;
  return (4.0 * d1 - d2) / (2.0 * h);
}

// Directional derivative of g along the chart components of f at x, central
// difference with the displacement scaled to the field magnitude. Returns
// false when the stencil leaves the chart.
bool directional_derivative(const Manifold& m,
                            const std::function<double(const ManifoldPoint&)>& g,
                            const ManifoldPoint& x, const Eigen::VectorXd& f,
                            double* out) {
  const double fmag = f.lpNorm<Eigen::Infinity>();
  if (fmag == 0.0) {
    *out = 0.0;
    return true;
  }
  const double h = fd_step(x.coords) / std::max(1.0, fmag);
  const Eigen::VectorXd fwd = x.coords + h * f;
  const Eigen::VectorXd bwd = x.coords - h * f;
  if (!m.contains(fwd) || !m.contains(bwd)) return false;
  *out = (g(ManifoldPoint{fwd, m.id()}) - g(ManifoldPoint{bwd, m.id()})) /
         (2.0 * h);
  return true;
}

// Dyadic radius schedule of the unbounded-growth checks; 20 rungs, capped at
// the chart-representable radius for infinite r0.
std::vector<double> dyadic_radii(const VectorField& field) {
  const double r0 = field.domain_radius();
  const double cap = field.manifold().max_safe_radius(field.equilibrium());
  std::vector<double> radii;
  for (int k = 1; k <= 20; ++k) {
    const double r = std::isinf(r0) ? std::ldexp(1.0, k)  // 2^k
                                    : r0 * (1.0 - std::ldexp(1.0, -k));
    if (r > cap) break;
    radii.push_back(r);
  }
  return radii;
}

double ring_minimum(const VectorField& field,
                    const std::function<double(const ManifoldPoint&)>& g,
                    double r, int n_dirs) {
  double m = std::numeric_limits<double>::infinity();
  for (const ManifoldPoint& x : geodesic_ring(field, r, n_dirs))
    m = std::min(m, g(x));
  return m;
}

// Unbounded growth along a radius schedule: either the last minimum dwarfs
// the first or every rung keeps a doubling trend.
bool grows_unbounded(const std::vector<double>& minima) {
  if (minima.size() < 2) return false;
  if (minima.back() > 1e6 * minima.front() && minima.front() > 0.0) return true;
  for (size_t k = 1; k < minima.size(); ++k) {
    if (!(minima[k] > minima[k - 1])) return false;
    if (!(minima[k] >= 1.9 * minima[k - 1])) return false;
  }
  return true;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j;
  j["verdict"] = to_string(report.verdict);
  j["n_samples"] = report.n_samples;
  j["worst_margin"] = report.worst_margin;
  if (report.witness) {
    nlohmann::json w = nlohmann::json::array();
    w.push_back(report.witness->t);
    for (Eigen::Index i = 0; i < report.witness->x.coords.size(); ++i)
      w.push_back(report.witness->x.coords(i));
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["details"] = report.details;
  return j;
}

CheckReport check_sandwich(const LyapunovCandidate& cand,
                           const VectorField& field,
                           const std::vector<GridSample>& grid) {
  if (!cand.V || !cand.W1 || !cand.W2)
    throw UsageError("sandwich check needs V, W1 and W2");
  if (grid.empty()) throw UsageError("sandwich check needs a nonempty grid");

  CheckReport rep;
  rep.n_samples = static_cast<long>(grid.size());
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  bool finite = true;
  for (const GridSample& s : grid) {
    const double v = cand.V(s.t, s.x);
    const double w1 = cand.W1(s.x);
    const double w2 = cand.W2(s.x);
    if (!std::isfinite(v) || !std::isfinite(w1) || !std::isfinite(w2)) {
      finite = false;
      rep.witness = s;
      break;
    }
    const double tol = 1e-9 * (1.0 + std::abs(v));
    const double margin = std::min(v - w1, w2 - v);
    if (margin < worst) {
      worst = margin;
      if (margin < -tol) rep.witness = s;
    }
    if (margin < -tol) ok = false;
  }
  if (!finite) {
    rep.verdict = Verdict::kInconclusive;
    rep.details = "non-finite candidate value on the grid";
    return rep;
  }
  rep.worst_margin = worst;
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  if (ok) rep.witness.reset();
  rep.details = "min(V-W1, W2-V) over grid: " + fmt(worst);
  return rep;
}

CheckReport check_decrease(const LyapunovCandidate& cand,
                           const VectorField& field,
                           const std::vector<GridSample>& grid) {
  if (!cand.V || !cand.W3)
    throw UsageError("decrease check needs V and W3");
  if (grid.empty()) throw UsageError("decrease check needs a nonempty grid");

  const Manifold& m = field.manifold();
  CheckReport rep;
  long used = 0;
  long skipped = 0;
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const GridSample& s : grid) {
    Eigen::VectorXd f;
    try {
      f = field.eval_comps(s.t, s.x.coords);
    } catch (const DomainError&) {
      ++skipped;
      continue;
    }
    double dV = 0.0;
    auto v_at = [&](const ManifoldPoint& p) { return cand.V(s.t, p); };
    if (!directional_derivative(m, v_at, s.x, f, &dV)) {
      ++skipped;
      continue;
    }
    const double vt = time_derivative(cand, s.t, s.x);
    const double w3 = cand.W3(s.x);
    const double tol = 1e-6 * (1.0 + std::abs(w3));
    const double margin = -w3 - (vt + dV);
    ++used;
    if (margin < worst) {
      worst = margin;
      if (margin < -tol) rep.witness = s;
    }
    if (margin < -tol) ok = false;
  }
  rep.n_samples = used;
  if (skipped > 0 &&
      skipped * 100 > static_cast<long>(grid.size())) {
    rep.verdict = Verdict::kInconclusive;
    rep.details = "too many samples skipped at the chart boundary (" +
                  std::to_string(skipped) + "/" +
                  std::to_string(grid.size()) + ")";
    return rep;
  }
  rep.worst_margin = worst;
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  if (ok) rep.witness.reset();
  rep.details = "min of -W3 - (V_t + dV(f)): " + fmt(worst) +
                (skipped ? ", skipped " + std::to_string(skipped) : "");
  return rep;
}

DoaEstimate estimate_doa(const LyapunovCandidate& cand,
                         const VectorField& field, double r, int n_ring) {
  if (!(r > 0.0)) throw UsageError("doa radius must be positive");
  if (n_ring < 4) throw UsageError("doa needs at least 4 ring directions");
  const Manifold& m = field.manifold();
  const ManifoldPoint xs = field.equilibrium();
  if (r >= field.domain_radius())
    throw RangeError("doa radius " + fmt(r) +
                     " reaches or exceeds the field's domain radius r0 = " +
                     fmt(field.domain_radius()));
  if (r >= m.injectivity_radius(xs))
    throw RangeError("doa radius reaches the injectivity radius");

  auto w1_at_angle = [&](double theta) {
    TangentVec u = m.unit_direction(xs, theta);
    return cand.W1(m.exp_map(xs, TangentVec{xs, r * u.comps}));
  };

  double ring_min = std::numeric_limits<double>::infinity();
  int argmin = 0;
  const bool one_dim =
      m.kind() == ManifoldKind::kEuclidean && m.dimension() == 1;
  if (one_dim) {
    const auto ring = geodesic_ring(field, r, n_ring);
    for (const auto& x : ring) ring_min = std::min(ring_min, cand.W1(x));
  } else {
    for (int j = 0; j < n_ring; ++j) {
      const double w = w1_at_angle(2.0 * std::numbers::pi * j / n_ring);
      if (w < ring_min) {
        ring_min = w;
        argmin = j;
      }
    }
    // local refinement between the argmin's neighbors
    double lo = 2.0 * std::numbers::pi * (argmin - 1) / n_ring;
    double hi = 2.0 * std::numbers::pi * (argmin + 1) / n_ring;
    for (int it = 0; it < 60; ++it) {
      const double t1 = lo + (hi - lo) / 3.0;
      const double t2 = hi - (hi - lo) / 3.0;
      if (w1_at_angle(t1) < w1_at_angle(t2))
        hi = t2;
      else
        lo = t1;
    }
    ring_min = std::min(ring_min, w1_at_angle(0.5 * (lo + hi)));
  }

  DoaEstimate est;
  est.r = r;
  est.ring_min = ring_min;
  est.c = 0.99 * ring_min;
  const double c = est.c;
  auto W2 = cand.W2;
  est.member_test = [m, xs, W2, r, c](const ManifoldPoint& x) {
    return m.distance(x, xs) <= r + 1e-12 && W2(x) <= c + 1e-12;
  };

  // interior members for invariance probes
  const int probe_dirs = one_dim ? 2 : 16;
  for (int fr = 1; fr <= 8; ++fr) {
    const double s = r * fr / 8.0;
    for (const ManifoldPoint& x : geodesic_ring(field, s, probe_dirs))
      if (est.member_test(x)) est.sample_points.push_back(x);
  }
  return est;
}

CheckReport check_properness(const LyapunovCandidate& cand,
                             const VectorField& field) {
  if (!cand.W1) throw UsageError("properness check needs W1");
  const Manifold& m = field.manifold();
  CheckReport rep;
  if (std::isfinite(m.injectivity_radius(field.equilibrium()))) {
    rep.verdict = Verdict::kInconclusive;
    rep.details = "properness undefined below a finite injectivity radius";
    return rep;
  }
  const auto radii = dyadic_radii(field);
  std::vector<double> minima;
  minima.reserve(radii.size());
  for (double r : radii)
    minima.push_back(ring_minimum(field, cand.W1, r, 64));
  rep.n_samples = static_cast<long>(minima.size()) * 64;
  const bool ok = grows_unbounded(minima);
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  rep.worst_margin = minima.empty() ? 0.0 : minima.back() - minima.front();
  rep.details = "ring minima of W1 from " + fmt(minima.front()) + " at rho=" +
                fmt(radii.front()) + " to " + fmt(minima.back()) +
                " at rho=" + fmt(radii.back()) +
                (ok ? "; unbounded growth" : "; growth stalls");
  return rep;
}

CheckReport check_barrier(const LyapunovCandidate& cand,
                          const VectorField& field, const GridSpec& spec) {
  if (!cand.W1) throw UsageError("barrier check needs W1");
  const double r0 = field.domain_radius();
  if (std::isinf(r0))
    throw UsageError("barrier check needs a finite domain radius r0");

  const Manifold& m = field.manifold();
  const ManifoldPoint xs = field.equilibrium();

  // growth of W1 / (r0^2 - rho^2) toward the domain boundary
  auto scaled = [&](const ManifoldPoint& x) {
    const double rho = m.distance(x, xs);
    return cand.W1(x) / (r0 * r0 - rho * rho);
  };
  const auto radii = dyadic_radii(field);
  std::vector<double> minima;
  for (double r : radii) minima.push_back(ring_minimum(field, scaled, r, 64));
  const bool growth_ok = grows_unbounded(minima);

  // rho^2 must not increase along the flow
  auto rho2 = [&](const ManifoldPoint& x) {
    const double rho = m.distance(x, xs);
    return rho * rho;
  };
  const auto grid = polar_grid(field, spec);
  CheckReport rep;
  long used = 0;
  long skipped = 0;
  bool flow_ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (const GridSample& s : grid) {
    Eigen::VectorXd f;
    try {
      f = field.eval_comps(s.t, s.x.coords);
    } catch (const DomainError&) {
      ++skipped;
      continue;
    }
    double d = 0.0;
    if (!directional_derivative(m, rho2, s.x, f, &d)) {
      ++skipped;
      continue;
    }
    const double tol = 1e-6 * (1.0 + rho2(s.x));
    const double margin = -d;  // want d <= 0
    ++used;
    if (margin < worst) {
      worst = margin;
      if (margin < -tol) rep.witness = s;
    }
    if (margin < -tol) flow_ok = false;
  }
  rep.n_samples = used + static_cast<long>(minima.size()) * 64;
  if (skipped > 0 && skipped * 100 > static_cast<long>(grid.size())) {
    rep.verdict = Verdict::kInconclusive;
    rep.details = "too many samples skipped at the chart boundary";
    return rep;
  }
  rep.worst_margin = worst;
  const bool ok = growth_ok && flow_ok;
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  if (ok) rep.witness.reset();
  rep.details = std::string("barrier growth ") +
                (growth_ok ? "unbounded" : "stalls") +
                "; min of -d(rho^2)(f): " + fmt(worst);
  return rep;
}

CheckReport verify_exponential_bound(const LyapunovCandidate& cand,
                                     const VectorField& field,
                                     const std::vector<Trajectory>& trajs) {
  if (!cand.exp_constants)
    throw UsageError("exponential bound needs exp constants (k1,k2,k3,a)");
  if (trajs.empty())
    throw UsageError("exponential bound needs at least one trajectory");
  const ExpConstants& c = *cand.exp_constants;
  if (!(c.k1 > 0.0) || !(c.k2 > 0.0) || !(c.k3 > 0.0) || !(c.a > 0.0))
    throw UsageError("exp constants must be positive");

  const Manifold& m = field.manifold();
  const ManifoldPoint xs = field.equilibrium();
  const double factor = std::pow(c.k2 / c.k1, 1.0 / c.a);
  const double rate = c.k3 / (c.a * c.k2);
  const double ball = std::pow(c.k1 / c.k2, 1.0 / c.a) * field.domain_radius();
  constexpr double kSlack = 1.0 + 1e-6;

  CheckReport rep;
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  long n = 0;
  for (const Trajectory& traj : trajs) {
    if (!(traj.manifold_id() == m.id()))
      throw UsageError("trajectory belongs to another manifold");
    const double t0 = traj.t0();
    const double rho0 = m.distance(traj.point(0), xs);
    if (!(rho0 < ball))
      throw UsageError(
          "trajectory starts outside the certified ball of radius " +
          fmt(ball));
    for (int k = 0; k < traj.size(); ++k) {
      const double rho = m.distance(traj.point(k), xs);
      const double bound =
          factor * rho0 * std::exp(-rate * (traj.times()[k] - t0)) * kSlack;
      const double margin = bound - rho;
      ++n;
      if (margin < worst) {
        worst = margin;
        if (margin < 0.0) rep.witness = GridSample{traj.times()[k], traj.point(k)};
      }
      if (margin < 0.0) ok = false;
    }
  }
  rep.n_samples = n;
  rep.worst_margin = worst;
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  if (ok) rep.witness.reset();
  rep.details = "decay rate " + fmt(rate) + ", overshoot factor " +
                fmt(factor) + ", min bound slack " + fmt(worst);
  return rep;
}

CheckReport verify_uniform_attraction(const VectorField& field,
                                      const std::vector<ManifoldPoint>& x0s,
                                      const std::vector<double>& t0s,
                                      double eps, double t_budget,
                                      double h0) {
  if (x0s.empty() || t0s.empty())
    throw UsageError("uniform attraction needs initial states and times");
  if (!(eps > 0.0) || !(t_budget > 0.0))
    throw UsageError("uniform attraction needs positive eps and budget");

  CheckReport rep;
  bool all_hit = true;
  double max_uptick = 0.0;
  double worst_ratio = 1.0;
  double max_hit = 0.0;
  constexpr double kMaxSpread = 10.0;

  for (const ManifoldPoint& x0 : x0s) {
    double hit_min = std::numeric_limits<double>::infinity();
    double hit_max = 0.0;
    for (double t0 : t0s) {
      const ProbeResult res =
          probe_convergence(field, t0, x0, eps, t_budget, h0);
      ++rep.n_samples;
      max_uptick = std::max(max_uptick, res.max_rho_uptick);
      if (!res.hit) {
        all_hit = false;
        if (!rep.witness) rep.witness = GridSample{t0, x0};
        continue;
      }
      const double dur = res.t_hit - t0;
      hit_min = std::min(hit_min, dur);
      hit_max = std::max(hit_max, dur);
      max_hit = std::max(max_hit, dur);
    }
    if (hit_max > 0.0 && hit_min > 0.0)
      worst_ratio = std::max(worst_ratio, hit_max / hit_min);
  }

  const bool monotone = max_uptick <= 1e-9;
  const bool spread_ok = worst_ratio <= kMaxSpread;
  const bool ok = all_hit && monotone && spread_ok;
  rep.verdict = ok ? Verdict::kPass : Verdict::kFail;
  if (ok) rep.witness.reset();
  rep.worst_margin = t_budget - max_hit;
  rep.details = "max hitting time " + fmt(max_hit) + ", spread max/min " +
                fmt(worst_ratio) + ", max distance uptick " + fmt(max_uptick);
  return rep;
}

}  // namespace manistab
