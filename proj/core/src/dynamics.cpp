#include "manistab/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

namespace manistab {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using Valid = std::function<bool(const Eigen::VectorXd&)>;

// Why the last trial step was rejected: a domain/chart exit wants an
// IntegrationError at the cap, a non-finite blowup wants a StiffnessError.
struct RejectCause {
  bool exit{true};
};

std::optional<Eigen::VectorXd> try_rk4(const Rhs& rhs, const Valid& valid,
                                       double t, const Eigen::VectorXd& y,
                                       double h, RejectCause* why) {
  auto stage = [&](double ts,
                   const Eigen::VectorXd& ys) -> std::optional<Eigen::VectorXd> {
    if (!ys.allFinite()) {
      why->exit = false;
      return std::nullopt;
    }
    try {
      Eigen::VectorXd k = rhs(ts, ys);
      if (!k.allFinite()) {
        why->exit = false;
        return std::nullopt;
      }
      return k;
    } catch (const DomainError&) {
      why->exit = true;
      return std::nullopt;
    } catch (const RangeError&) {
      why->exit = true;
      return std::nullopt;
    }
  };

  auto k1 = stage(t, y);
  if (!k1) return std::nullopt;
  auto k2 = stage(t + 0.5 * h, y + (0.5 * h) * *k1);
  if (!k2) return std::nullopt;
  auto k3 = stage(t + 0.5 * h, y + (0.5 * h) * *k2);
  if (!k3) return std::nullopt;
  auto k4 = stage(t + h, y + h * *k3);
  if (!k4) return std::nullopt;

  Eigen::VectorXd y1 =
      y + (h / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
  if (!y1.allFinite()) {
    why->exit = false;
    return std::nullopt;
  }
  if (!valid(y1)) {
    why->exit = true;
    return std::nullopt;
  }
  return y1;
}

constexpr int kMaxHalvings = 40;

// Advances y from t to t + h. Rejected steps are retried on the two half
// intervals; past kMaxHalvings the rejection cause picks the error.
Eigen::VectorXd advance(const Rhs& rhs, const Valid& valid, double t,
                        Eigen::VectorXd y, double h, int depth) {
  RejectCause why;
  if (auto y1 = try_rk4(rhs, valid, t, y, h, &why)) return std::move(*y1);
  if (depth >= kMaxHalvings) {
    char msg[128];
    if (why.exit) {
      std::snprintf(msg, sizeof msg,
                    "integration stopped at the domain boundary near t=%.17g",
                    t);
      throw IntegrationError(msg, t, to_std(y));
    }
    std::snprintf(msg, sizeof msg,
                  "step size underflow (non-finite dynamics) near t=%.17g", t);
    throw StiffnessError(msg);
  }
  Eigen::VectorXd mid = advance(rhs, valid, t, std::move(y), 0.5 * h, depth + 1);
  return advance(rhs, valid, t + 0.5 * h, std::move(mid), 0.5 * h, depth + 1);
}

int grid_steps(double t0, double t_max, double h0) {
  if (!(h0 > 0.0)) throw UsageError("step size h0 must be positive");
  if (!(t_max > t0)) throw UsageError("t_max must exceed t0");
  return static_cast<int>(std::floor((t_max - t0) / h0 + 1e-9));
}

}  // namespace

VectorField::VectorField(Manifold manifold, EvalFn eval,
                         ManifoldPoint equilibrium, double domain_radius)
    : manifold_(std::move(manifold)),
      eval_(std::move(eval)),
      equilibrium_(std::move(equilibrium)),
      domain_radius_(domain_radius) {
  if (!eval_) throw UsageError("vector field needs an evaluation function");
  if (!(equilibrium_.manifold == manifold_.id()) ||
      !manifold_.contains(equilibrium_.coords))
    throw UsageError("equilibrium must be a point of the field's manifold");
  if (!(domain_radius_ > 0.0))
    throw UsageError("domain radius r0 must be positive");

  // the declared equilibrium must actually be one
  const Eigen::MatrixXd G = manifold_.metric_at(equilibrium_);
  for (double t : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    const Eigen::VectorXd v = eval_(t, equilibrium_.coords);
    if (!(std::sqrt(v.dot(G * v)) < 1e-12))
      throw UsageError("field does not vanish at the declared equilibrium");
  }
}

bool VectorField::in_domain(const Eigen::VectorXd& coords) const {
  if (!manifold_.contains(coords)) return false;
  if (std::isinf(domain_radius_)) return true;
  return manifold_.distance(ManifoldPoint{coords, manifold_.id()},
                            equilibrium_) < domain_radius_;
}

Eigen::VectorXd VectorField::eval_comps(double t,
                                        const Eigen::VectorXd& coords) const {
  if (t < 0.0) throw UsageError("field evaluated at negative time");
  if (coords.size() != manifold_.coord_size())
    throw UsageError("field evaluated with wrong coordinate size");
  if (!in_domain(coords))
    throw DomainError("field evaluated outside its domain");
  return eval_(t, coords);
}

TangentVec VectorField::operator()(double t, const ManifoldPoint& x) const {
  if (!(x.manifold == manifold_.id()))
    throw UsageError("field evaluated at a point of another manifold");
  return TangentVec{x, eval_comps(t, x.coords)};
}

Trajectory::Trajectory(const Manifold& manifold, std::vector<double> times,
                       Eigen::MatrixXd coords, std::string integrator_tag)
    : manifold_id_(manifold.id()),
      times_(std::move(times)),
      coords_(std::move(coords)),
      integrator_tag_(std::move(integrator_tag)) {
  if (times_.empty() || coords_.rows() != static_cast<Eigen::Index>(times_.size()))
    throw UsageError("trajectory needs one coordinate row per time");
  if (coords_.cols() != manifold.coord_size())
    throw UsageError("trajectory coordinate size does not match the manifold");
  for (size_t k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1]))
      throw UsageError("trajectory times must be strictly increasing");
  for (Eigen::Index k = 0; k < coords_.rows(); ++k)
    if (!manifold.contains(coords_.row(k).transpose()))
      throw UsageError("trajectory sample outside the chart domain");
}

ManifoldPoint Trajectory::point(int k) const {
  return ManifoldPoint{coords_.row(k).transpose(), manifold_id_};
}

Trajectory integrate_chart(const VectorField& field, double t0,
                           const ManifoldPoint& x0, double t_max, double h0) {
  const Manifold& m = field.manifold();
  if (!(x0.manifold == m.id()) || !field.in_domain(x0.coords))
    throw DomainError("initial state outside the field's domain");
  if (t0 < 0.0) throw UsageError("t0 must be nonnegative");
  const int n_steps = grid_steps(t0, t_max, h0);

  Rhs rhs = [&](double t, const Eigen::VectorXd& y) {
    return field.eval_comps(t, y);
  };
  Valid valid = [&](const Eigen::VectorXd& y) { return field.in_domain(y); };

  std::vector<double> times(n_steps + 1);
  Eigen::MatrixXd coords(n_steps + 1, m.coord_size());
  Eigen::VectorXd y = x0.coords;
  times[0] = t0;
  coords.row(0) = y;
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * h0;
    y = advance(rhs, valid, t, std::move(y), h0, 0);
    times[k + 1] = t0 + (k + 1) * h0;
    coords.row(k + 1) = y;
  }
  return Trajectory(m, std::move(times), std::move(coords), "chart");
}

TangentVec pullback_field(const VectorField& field, double t,
                          const TangentVec& X) {
  const Manifold& m = field.manifold();
  const ManifoldPoint& xs = field.equilibrium();
  if (!(X.base.manifold == m.id()) ||
      (X.base.coords - xs.coords).lpNorm<Eigen::Infinity>() > 1e-12)
    throw UsageError("pullback field needs a tangent at the equilibrium");
  if (m.norm(X) >= m.injectivity_radius(xs))
    throw RangeError("tangent leaves the injectivity ball at the equilibrium");

  const ManifoldPoint y = m.exp_map(xs, X);
  const Eigen::VectorXd v = field.eval_comps(t, y.coords);

  // chart Jacobian of z -> log_{x*}(z) at y, by central differences
  const int n = m.coord_size();
  const double h = fd_step(y.coords);
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd fwd = y.coords;
    Eigen::VectorXd bwd = y.coords;
    fwd(j) += h;
    bwd(j) -= h;
    if (!m.contains(fwd) || !m.contains(bwd))
      throw DomainError("pullback stencil escapes the chart");
    J.col(j) = (m.log_map(xs, ManifoldPoint{fwd, m.id()}).comps -
                m.log_map(xs, ManifoldPoint{bwd, m.id()}).comps) /
               (2.0 * h);
  }
  return TangentVec{xs, J * v};
}

Trajectory integrate_pullback(const VectorField& field, double t0,
                              const ManifoldPoint& x0, double t_max,
                              double h0) {
  const Manifold& m = field.manifold();
  const ManifoldPoint& xs = field.equilibrium();
  if (!field.in_domain(x0.coords))
    throw DomainError("initial state outside the field's domain");
  if (t0 < 0.0) throw UsageError("t0 must be nonnegative");
  const int n_steps = grid_steps(t0, t_max, h0);
  const double inj = m.injectivity_radius(xs);
  const Eigen::MatrixXd G = m.metric_at(xs);

  auto tangent_norm = [&](const Eigen::VectorXd& c) {
    return std::sqrt(std::max(0.0, c.dot(G * c)));
  };

  Rhs rhs = [&](double t, const Eigen::VectorXd& Xc) {
    return pullback_field(field, t, TangentVec{xs, Xc}).comps;
  };
  Valid valid = [&](const Eigen::VectorXd& Xc) {
    return std::isinf(inj) || tangent_norm(Xc) < inj;
  };

  Eigen::VectorXd Xc = m.log_map(xs, x0).comps;
  std::vector<double> times(n_steps + 1);
  Eigen::MatrixXd coords(n_steps + 1, m.coord_size());
  times[0] = t0;
  coords.row(0) = m.exp_map(xs, TangentVec{xs, Xc}).coords;
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * h0;
    Xc = advance(rhs, valid, t, std::move(Xc), h0, 0);
    times[k + 1] = t0 + (k + 1) * h0;
    coords.row(k + 1) = m.exp_map(xs, TangentVec{xs, Xc}).coords;
  }
  return Trajectory(m, std::move(times), std::move(coords), "pullback");
}

TangentVec compactify(const Manifold& m, const TangentVec& X, double r0) {
  if (!(r0 > 0.0) || std::isinf(r0))
    throw UsageError("compactification needs finite r0 > 0");
  const double nx = m.norm(X);
  if (nx >= r0)
    throw RangeError("tangent norm reaches r0; outside the compactified ball");
  return TangentVec{X.base, X.comps / (r0 - nx)};
}

TangentVec decompactify(const Manifold& m, const TangentVec& Y, double r0) {
  if (!(r0 > 0.0) || std::isinf(r0))
    throw UsageError("compactification needs finite r0 > 0");
  const double ny = m.norm(Y);
  return TangentVec{Y.base, (r0 / (1.0 + ny)) * Y.comps};
}

Trajectory integrate_compactified(const VectorField& field, double t0,
                                  const ManifoldPoint& x0, double t_max,
                                  double h0, double r0) {
  const Manifold& m = field.manifold();
  const ManifoldPoint& xs = field.equilibrium();
  if (!field.in_domain(x0.coords))
    throw DomainError("initial state outside the field's domain");
  if (t0 < 0.0) throw UsageError("t0 must be nonnegative");
  if (!(r0 > 0.0) || std::isinf(r0))
    throw UsageError("integrate_compactified needs finite r0 > 0");
  if (!(r0 <= m.injectivity_radius(xs)))
    throw RangeError("r0 must stay within the injectivity radius");
  const int n_steps = grid_steps(t0, t_max, h0);

  auto phi = [&](const Eigen::VectorXd& Xc) {
    return compactify(m, TangentVec{xs, Xc}, r0).comps;
  };
  auto phi_inv = [&](const Eigen::VectorXd& Yc) {
    return decompactify(m, TangentVec{xs, Yc}, r0).comps;
  };

  Rhs rhs = [&](double t, const Eigen::VectorXd& Yc) -> Eigen::VectorXd {
    const Eigen::VectorXd Xc = phi_inv(Yc);
    const Eigen::VectorXd F = pullback_field(field, t, TangentVec{xs, Xc}).comps;
    // dphi at X by central differences
    const int n = m.coord_size();
    const double h = fd_step(Xc);
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd fwd = Xc;
      Eigen::VectorXd bwd = Xc;
      fwd(j) += h;
      bwd(j) -= h;
      J.col(j) = (phi(fwd) - phi(bwd)) / (2.0 * h);
    }
    return J * F;
  };
  Valid valid = [](const Eigen::VectorXd& Yc) { return Yc.allFinite(); };

  Eigen::VectorXd X0c = m.log_map(xs, x0).comps;
  Eigen::VectorXd Yc = phi(X0c);  // RangeError when rho(x0, x*) >= r0

  std::vector<double> times(n_steps + 1);
  Eigen::MatrixXd coords(n_steps + 1, m.coord_size());
  times[0] = t0;
  coords.row(0) = m.exp_map(xs, TangentVec{xs, phi_inv(Yc)}).coords;
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * h0;
    Yc = advance(rhs, valid, t, std::move(Yc), h0, 0);
    times[k + 1] = t0 + (k + 1) * h0;
    coords.row(k + 1) = m.exp_map(xs, TangentVec{xs, phi_inv(Yc)}).coords;
  }
  return Trajectory(m, std::move(times), std::move(coords), "compactified");
}

ProbeResult probe_convergence(const VectorField& field, double t0,
                              const ManifoldPoint& x0, double eps,
                              double t_budget, double h0) {
  const Manifold& m = field.manifold();
  if (!(eps > 0.0)) throw UsageError("eps must be positive");
  if (!field.in_domain(x0.coords))
    throw DomainError("initial state outside the field's domain");
  const int n_steps = grid_steps(t0, t0 + t_budget, h0);

  Rhs rhs = [&](double t, const Eigen::VectorXd& y) {
    return field.eval_comps(t, y);
  };
  Valid valid = [&](const Eigen::VectorXd& y) { return field.in_domain(y); };

  ProbeResult res;
  Eigen::VectorXd y = x0.coords;
  double rho = m.distance(x0, field.equilibrium());
  res.initial_rho = rho;
  if (rho < eps) {
    res.hit = true;
    res.t_hit = t0;
    res.final_rho = rho;
    return res;
  }
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * h0;
    y = advance(rhs, valid, t, std::move(y), h0, 0);
    const double next =
        m.distance(ManifoldPoint{y, m.id()}, field.equilibrium());
    res.max_rho_uptick = std::max(res.max_rho_uptick, next - rho);
    rho = next;
    if (rho < eps) {
      res.hit = true;
      res.t_hit = t0 + (k + 1) * h0;
      res.final_rho = rho;
      return res;
    }
  }
  res.final_rho = rho;
  return res;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const Eigen::Index n = traj.coords().cols();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",coord_" << i;
  out << "\n";
  char buf[40];
  for (int k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times()[k]);
    out << buf;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.coords()(k, i));
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace manistab
