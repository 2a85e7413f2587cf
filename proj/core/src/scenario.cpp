#include "manistab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>

#include "manistab/errors.hpp"

namespace manistab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// f1 = -2 d(t) x1 x2^2, f2 = d(t) x2 (a^2 + x1^2 - x2^2). Shared by the
// hyperbolic and flat scenarios so both evaluate bitwise identically.
VectorField::EvalFn planar_benchmark_field(double a, DCoefficient d) {
  return [a, d](double t, const Eigen::VectorXd& x) {
    const double dt = d(t);
    Eigen::VectorXd f(2);
    f(0) = -2.0 * dt * x(0) * x(1) * x(1);
    f(1) = dt * x(1) * (a * a + x(0) * x(0) - x(1) * x(1));
    return f;
  };
}

std::vector<double> default_t0_list() {
  std::vector<double> t0s;
  for (int i = 0; i <= 10; ++i) t0s.push_back(static_cast<double>(i));
  return t0s;
}

nlohmann::json d_to_json(const DCoefficient& d) {
  if (d.is_constant())
    return {{"kind", "constant"}, {"value", d.constant_value()}};
  return {{"kind", "two_plus_sin"}};
}

nlohmann::json run_to_json(const RunParams& run) {
  nlohmann::json x0s = nlohmann::json::array();
  for (const ManifoldPoint& p : run.x0_list) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.coords.size(); ++i)
      row.push_back(p.coords(i));
    x0s.push_back(row);
  }
  return {{"t_max", run.t_max},     {"h0", run.h0},
          {"eps", run.eps},         {"t_budget", run.t_budget},
          {"t0_list", run.t0_list}, {"x0_list", x0s}};
}

void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) {
      const std::string path =
          prefix.empty() ? it.key() : prefix + "." + it.key();
      throw ConfigError("unknown config key \"" + path + "\"", path);
    }
  }
}

double positive_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number())
    throw ConfigError("config key \"" + path + "\" must be a number", path);
  const double x = v.get<double>();
  if (!std::isfinite(x) || !(x > 0.0))
    throw ConfigError("config key \"" + path + "\" must be positive", path);
  return x;
}

}  // namespace

DCoefficient DCoefficient::constant(double c) {
  if (!std::isfinite(c) || !(c > 0.0))
    throw UsageError("constant coefficient must be positive");
  return DCoefficient(true, c, c);
}

DCoefficient DCoefficient::two_plus_sin() {
  return DCoefficient(false, 0.0, 1.0);
}

double DCoefficient::operator()(double t) const {
  return constant_ ? value_ : 2.0 + std::sin(t);
}

std::vector<ManifoldPoint> default_x0_grid(const VectorField& field,
                                           double r_inner, double r_outer) {
  std::vector<ManifoldPoint> pts;
  for (double r : {r_inner, r_outer})
    for (const ManifoldPoint& x : geodesic_ring(field, r, 4))
      pts.push_back(x);
  return pts;
}

Scenario build_example_hyperbolic(double a, const DCoefficient& d) {
  if (!std::isfinite(a) || !(a > 0.0))
    throw UsageError("equilibrium height a must be positive");
  Manifold m = Manifold::half_plane();
  Eigen::VectorXd eq(2);
  eq << 0.0, a;
  const ManifoldPoint A = m.point(eq);
  VectorField field(m, planar_benchmark_field(a, d), A, kInf);
  const double k = d.lower_bound();

  LyapunovCandidate cand;
  auto rho2 = [m, A](const ManifoldPoint& x) {
    const double rho = m.distance(x, A);
    return rho * rho;
  };
  cand.V = [rho2](double, const ManifoldPoint& x) { return rho2(x); };
  cand.W1 = rho2;
  cand.W2 = rho2;
  // Closed form of -Vdot / d(t), scaled by the lower bound k of d. The 0/0 at
  // the equilibrium resolves to 0 by continuity.
  cand.W3 = [m, A, a, k](const ManifoldPoint& x) {
    const double rho = m.distance(x, A);
    if (rho == 0.0) return 0.0;
    const double x1 = x.coords(0);
    const double x2 = x.coords(1);
    const double s = x2 * x2 - x1 * x1 - a * a;
    const double num = 4.0 * x1 * x1 * x2 * x2 + s * s;
    const double den = std::hypot(x1, a + x2) * std::hypot(x1, a - x2);
    return 2.0 * k * rho * num / den;
  };

  Scenario s{.name = "hyperbolic_example",
             .manifold = m,
             .field = field,
             .candidate = cand,
             .run = {},
             .claims = {"sandwich", "decrease", "properness",
                        "uniform_attraction"},
             .warnings = {},
             .exact = std::nullopt,
             .config = {}};
  s.run.t0_list = default_t0_list();
  s.run.x0_list = default_x0_grid(field, 2.5, 5.0);
  s.config = {{"template", "hyperbolic_example"},
              {"a", a},
              {"d", d_to_json(d)},
              {"run", run_to_json(s.run)}};
  return s;
}

Scenario build_example_euclidean(double a, const DCoefficient& d) {
  if (!std::isfinite(a) || !(a > 0.0))
    throw UsageError("equilibrium height a must be positive");
  Manifold m = Manifold::euclidean(2);
  Eigen::VectorXd eq(2);
  eq << 0.0, a;
  const ManifoldPoint A = m.point(eq);
  // The x1-axis consists of rest points, so the largest ball around A on
  // which the flow can contract is bounded by the distance to that line.
  const double r0 = A.coords(1);
  VectorField field(m, planar_benchmark_field(a, d), A, r0);
  const double k = d.lower_bound();

  LyapunovCandidate cand;
  auto dist2 = [m, A](const ManifoldPoint& x) {
    const double rho = m.distance(x, A);
    return rho * rho;
  };
  cand.V = [dist2](double, const ManifoldPoint& x) { return dist2(x); };
  cand.W1 = dist2;
  cand.W2 = dist2;
  cand.W3 = [a, k](const ManifoldPoint& x) {
    const double x1 = x.coords(0);
    const double x2 = x.coords(1);
    return 2.0 * k * x2 * (x2 + a) * (x1 * x1 + (x2 - a) * (x2 - a));
  };

  Scenario s{.name = "euclidean_example",
             .manifold = m,
             .field = field,
             .candidate = cand,
             .run = {},
             .claims = {"sandwich", "decrease", "barrier",
                        "uniform_attraction"},
             .warnings = {},
             .exact = std::nullopt,
             .config = {}};
  s.run.t0_list = default_t0_list();
  s.run.x0_list = default_x0_grid(field, 0.45 * a, 0.9 * a);
  s.config = {{"template", "euclidean_example"},
              {"a", a},
              {"d", d_to_json(d)},
              {"run", run_to_json(s.run)}};
  return s;
}

Scenario build_linear_oracle(int n, double lambda) {
  if (n < 1) throw UsageError("linear oracle needs n >= 1");
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw UsageError("lambda must be positive");
  Manifold m = Manifold::euclidean(n);
  const ManifoldPoint origin = m.point(Eigen::VectorXd::Zero(n));
  VectorField field(
      m,
      [lambda](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd f = -lambda * x;
        return f;
      },
      origin, kInf);

  LyapunovCandidate cand;
  auto norm2 = [](const ManifoldPoint& x) { return x.coords.squaredNorm(); };
  cand.V = [norm2](double, const ManifoldPoint& x) { return norm2(x); };
  cand.W1 = norm2;
  cand.W2 = norm2;
  cand.W3 = [lambda](const ManifoldPoint& x) {
    return 2.0 * lambda * x.coords.squaredNorm();
  };
  cand.exp_constants = ExpConstants{1.0, 1.0, 2.0 * lambda, 2.0};

  Scenario s{.name = "linear",
             .manifold = m,
             .field = field,
             .candidate = cand,
             .run = {},
             .claims = {"sandwich", "decrease", "exponential_bound",
                        "uniform_attraction"},
             .warnings = {},
             .exact = std::nullopt,
             .config = {}};
  s.exact = [lambda](double t0, const Eigen::VectorXd& x0, double t) {
    Eigen::VectorXd x = std::exp(-lambda * (t - t0)) * x0;
    return x;
  };
  s.run.t0_list = default_t0_list();
  s.run.x0_list = default_x0_grid(field, 0.5, 1.0);
  s.config = {{"template", "linear"},
              {"n", n},
              {"lambda", lambda},
              {"run", run_to_json(s.run)}};
  return s;
}

Scenario build_zero_field(int n) {
  if (n < 1) throw UsageError("zero field needs n >= 1");
  Manifold m = Manifold::euclidean(n);
  const ManifoldPoint origin = m.point(Eigen::VectorXd::Zero(n));
  VectorField field(
      m,
      [n](double, const Eigen::VectorXd&) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        return f;
      },
      origin, kInf);

  LyapunovCandidate cand;
  auto norm2 = [](const ManifoldPoint& x) { return x.coords.squaredNorm(); };
  cand.V = [norm2](double, const ManifoldPoint& x) { return norm2(x); };
  cand.W1 = norm2;
  cand.W2 = norm2;
  cand.W3 = [](const ManifoldPoint&) { return 0.0; };

  Scenario s{.name = "zero",
             .manifold = m,
             .field = field,
             .candidate = cand,
             .run = {},
             .claims = {"sandwich", "decrease"},
             .warnings = {},
             .exact = std::nullopt,
             .config = {}};
  s.exact = [](double, const Eigen::VectorXd& x0, double) { return x0; };
  s.run.t0_list = default_t0_list();
  s.run.x0_list = default_x0_grid(field, 0.5, 1.0);
  s.config = {{"template", "zero"}, {"n", n}, {"run", run_to_json(s.run)}};
  return s;
}

Scenario load_scenario(const std::string& config_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1;
    size_t col = 1;
    const size_t stop =
        std::min(config_text.size(), e.byte > 0 ? e.byte - 1 : size_t{0});
    for (size_t i = 0; i < stop; ++i) {
      if (config_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config root must be a JSON object");
  if (!j.contains("template"))
    throw ConfigError("config key \"template\" is required", "template");
  if (!j["template"].is_string())
    throw ConfigError("config key \"template\" must be a string", "template");
  const std::string tmpl = j["template"].get<std::string>();

  const bool planar =
      tmpl == "hyperbolic_example" || tmpl == "euclidean_example";
  if (planar) {
    reject_unknown_keys(j, "", {"template", "a", "d", "run"});
  } else if (tmpl == "linear") {
    reject_unknown_keys(j, "", {"template", "n", "lambda", "run"});
  } else if (tmpl == "zero") {
    reject_unknown_keys(j, "", {"template", "n", "run"});
  } else {
    throw ConfigError("unknown template \"" + tmpl + "\"", "template");
  }

  Scenario s = [&]() {
    if (planar) {
      const double a =
          j.contains("a") ? positive_number(j["a"], "a") : 1.0;
      DCoefficient d = DCoefficient::two_plus_sin();
      if (j.contains("d")) {
        const nlohmann::json& dj = j["d"];
        if (!dj.is_object())
          throw ConfigError("config key \"d\" must be an object", "d");
        reject_unknown_keys(dj, "d", {"kind", "value"});
        if (!dj.contains("kind") || !dj["kind"].is_string())
          throw ConfigError("config key \"d.kind\" must be a string",
                            "d.kind");
        const std::string kind = dj["kind"].get<std::string>();
        if (kind == "constant") {
          if (!dj.contains("value"))
            throw ConfigError("config key \"d.value\" is required for kind "
                              "\"constant\"",
                              "d.value");
          d = DCoefficient::constant(positive_number(dj["value"], "d.value"));
        } else if (kind == "two_plus_sin") {
          if (dj.contains("value"))
            throw ConfigError("config key \"d.value\" is only valid for kind "
                              "\"constant\"",
                              "d.value");
        } else {
          throw ConfigError("unknown coefficient kind \"" + kind + "\"",
                            "d.kind");
        }
      }
      return tmpl == "hyperbolic_example" ? build_example_hyperbolic(a, d)
                                          : build_example_euclidean(a, d);
    }
    int n = 2;
    if (j.contains("n")) {
      if (!j["n"].is_number_integer())
        throw ConfigError("config key \"n\" must be an integer", "n");
      n = j["n"].get<int>();
      if (n < 1) throw ConfigError("config key \"n\" must be >= 1", "n");
    }
    if (tmpl == "zero") return build_zero_field(n);
    const double lambda =
        j.contains("lambda") ? positive_number(j["lambda"], "lambda") : 1.0;
    return build_linear_oracle(n, lambda);
  }();

  if (!j.contains("run")) {
    s.warnings.push_back("run: missing; using template defaults");
  } else {
    const nlohmann::json& rj = j["run"];
    if (!rj.is_object())
      throw ConfigError("config key \"run\" must be an object", "run");
    reject_unknown_keys(
        rj, "run", {"t_max", "h0", "eps", "t_budget", "t0_list", "x0_list"});
    auto scalar = [&](const char* key, double* slot) {
      const std::string path = std::string("run.") + key;
      if (rj.contains(key)) {
        *slot = positive_number(rj[key], path);
      } else {
        s.warnings.push_back(path + ": missing; defaulting to " + fmt(*slot));
      }
    };
    scalar("t_max", &s.run.t_max);
    scalar("h0", &s.run.h0);
    scalar("eps", &s.run.eps);
    scalar("t_budget", &s.run.t_budget);

    if (rj.contains("t0_list")) {
      const nlohmann::json& tl = rj["t0_list"];
      if (!tl.is_array() || tl.empty())
        throw ConfigError("config key \"run.t0_list\" must be a nonempty "
                          "array",
                          "run.t0_list");
      std::vector<double> t0s;
      for (size_t i = 0; i < tl.size(); ++i) {
        const std::string path = "run.t0_list[" + std::to_string(i) + "]";
        if (!tl[i].is_number())
          throw ConfigError("config key \"" + path + "\" must be a number",
                            path);
        const double t0 = tl[i].get<double>();
        if (!std::isfinite(t0) || t0 < 0.0)
          throw ConfigError("config key \"" + path + "\" must be a "
                            "nonnegative number",
                            path);
        t0s.push_back(t0);
      }
      s.run.t0_list = std::move(t0s);
    } else {
      s.warnings.push_back("run.t0_list: missing; defaulting to 0..10");
    }

    if (rj.contains("x0_list")) {
      const nlohmann::json& xl = rj["x0_list"];
      if (!xl.is_array() || xl.empty())
        throw ConfigError("config key \"run.x0_list\" must be a nonempty "
                          "array",
                          "run.x0_list");
      std::vector<ManifoldPoint> x0s;
      for (size_t i = 0; i < xl.size(); ++i) {
        const std::string path = "run.x0_list[" + std::to_string(i) + "]";
        const nlohmann::json& row = xl[i];
        if (!row.is_array() ||
            row.size() != static_cast<size_t>(s.manifold.coord_size()))
          throw ConfigError("config key \"" + path + "\" must be an array "
                            "of " + std::to_string(s.manifold.coord_size()) +
                            " numbers",
                            path);
        Eigen::VectorXd coords(s.manifold.coord_size());
        for (size_t c = 0; c < row.size(); ++c) {
          if (!row[c].is_number())
            throw ConfigError("config key \"" + path + "\" must contain only "
                              "numbers",
                              path);
          coords(static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
        if (!s.field.in_domain(coords))
          throw ConfigError("config key \"" + path + "\" is outside the "
                            "field domain",
                            path);
        x0s.push_back(s.manifold.point(coords));
      }
      s.run.x0_list = std::move(x0s);
    } else {
      s.warnings.push_back(
          "run.x0_list: missing; defaulting to the template grid");
    }
  }

  s.config["run"] = run_to_json(s.run);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  return s.config.dump(2) + "\n";
}

}  // namespace manistab
