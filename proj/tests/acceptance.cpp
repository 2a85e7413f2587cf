// End-to-end acceptance harness. Each criterion prints one [PASS]/[FAIL]
// line; the process exit code is the number of failed criteria.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "manistab/curvature.hpp"
#include "manistab/errors.hpp"
#include "manistab/lyapunov.hpp"
#include "manistab/scenario.hpp"
#include "support/samplers.hpp"

#ifndef MANISTAB_CLI_PATH
#define MANISTAB_CLI_PATH ""
#endif

namespace fs = std::filesystem;
using namespace manistab;

#define CHECK_TRUE(expr)                                                    \
  do {                                                                      \
    if (!(expr)) {                                                          \
      ok = false;                                                           \
      std::printf("    check failed (line %d): %s\n", __LINE__, #expr);    \
    }                                                                       \
  } while (0)

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

const fs::path& temp_root() {
  static const fs::path root = [] {
    std::string tmpl =
        (fs::temp_directory_path() / "manistab_acc_XXXXXX").string();
    const char* made = mkdtemp(tmpl.data());
    if (!made) std::abort();
    return fs::path(made);
  }();
  return root;
}

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path p = temp_root() / (tag + "_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& tag, const std::string& text) {
  const fs::path p = fresh_dir(tag) / "config.json";
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

struct CmdResult {
  int exit_code;
  std::string out;
  std::string err;
};

CmdResult run_cli(const std::string& args) {
  const fs::path dir = fresh_dir("io");
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + MANISTAB_CLI_PATH + "\" " +
                          args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  const int code =
      (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return CmdResult{code, read_file(out), read_file(err)};
}

// Finite-difference derivative of V along a run of the field: time part plus
// the directional part along f, both central.
double fd_vdot(const LyapunovCandidate& cand, const VectorField& field,
               double t, const ManifoldPoint& x) {
  const double ht = 1e-6 * std::max(1.0, std::abs(t));
  const double vt =
      t >= ht
          ? (cand.V(t + ht, x) - cand.V(t - ht, x)) / (2.0 * ht)
          : (-3.0 * cand.V(t, x) + 4.0 * cand.V(t + ht, x) -
             cand.V(t + 2.0 * ht, x)) /
                (2.0 * ht);
  const Eigen::VectorXd f = field.eval_comps(t, x.coords);
  const double h = fd_step(x.coords) / std::max(1.0, f.lpNorm<Eigen::Infinity>());
  const Manifold& m = field.manifold();
  const ManifoldPoint fwd{x.coords + h * f, m.id()};
  const ManifoldPoint bwd{x.coords - h * f, m.id()};
  return vt + (cand.V(t, fwd) - cand.V(t, bwd)) / (2.0 * h);
}

// r0-restricted copy of a field (for compactified integration of fields
// declared on an unbounded domain).
VectorField restrict_field(const VectorField& f, double r0) {
  return VectorField(
      f.manifold(),
      [f](double t, const Eigen::VectorXd& x) { return f.eval_comps(t, x); },
      f.equilibrium(), r0);
}

bool criterion_exp_ray_isometry() {
  bool ok = true;
  const Manifold m = Manifold::half_plane();
  testsupport::Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ManifoldPoint x = m.point(rng.half_plane_point());
    const double s = rng.log_uniform(1e-3, 10.0);
    const TangentVec u = m.unit_direction(x, rng.angle());
    const ManifoldPoint y = m.exp_map(x, TangentVec{x, s * u.comps});
    worst = std::max(worst, std::abs(m.distance(x, y) - s));
  }
  CHECK_TRUE(worst < 1e-9);
  std::printf("    max |rho(x, exp_x(s u)) - s| over 1000 draws: %.3g\n",
              worst);
  return ok;
}

bool criterion_log_routes_agree() {
  bool ok = true;
  const Manifold m = Manifold::half_plane();

  const ManifoldPoint x = m.point(vec2(0.0, std::exp(1.0)));
  const ManifoldPoint y = m.point(vec2(0.0, 1.0));
  const TangentVec spot = m.log_via_distance_gradient(x, y);
  CHECK_TRUE(std::abs(spot.comps(0) - 0.0) < 1e-5);
  CHECK_TRUE(std::abs(spot.comps(1) + std::exp(1.0)) < 1e-5);

  testsupport::Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const ManifoldPoint a = m.point(rng.half_plane_point());
    const ManifoldPoint b = m.point(rng.half_plane_point());
    const TangentVec closed = m.log_map(a, b);
    const TangentVec grad = m.log_via_distance_gradient(a, b);
    worst = std::max(worst,
                     (closed.comps - grad.comps).lpNorm<Eigen::Infinity>());
  }
  CHECK_TRUE(worst < 1e-5);
  std::printf("    max closed-vs-gradient log deviation over 200 pairs: %.3g\n",
              worst);
  return ok;
}

bool criterion_integrator_equivalence() {
  bool ok = true;
  testsupport::Rng rng(303);

  const Scenario hyp =
      build_example_hyperbolic(1.0, DCoefficient::two_plus_sin());
  const VectorField hyp10 = restrict_field(hyp.field, 10.0);
  const Scenario euc = build_example_euclidean(1.0);

  struct Case {
    const VectorField* field;
    double r0;
    double r_lo, r_hi;
  };
  const Case cases[] = {{&hyp10, 10.0, 0.5, 2.5},
                        {&euc.field, euc.field.domain_radius(), 0.2, 0.8}};
  for (const Case& c : cases) {
    const Manifold& m = c.field->manifold();
    const ManifoldPoint xs = c.field->equilibrium();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double r = rng.uniform(c.r_lo, c.r_hi);
      const TangentVec u = m.unit_direction(xs, rng.angle());
      const ManifoldPoint x0 = m.exp_map(xs, TangentVec{xs, r * u.comps});
      const Trajectory a = integrate_chart(*c.field, 0.0, x0, 3.0, 1e-3);
      const Trajectory b = integrate_pullback(*c.field, 0.0, x0, 3.0, 1e-3);
      const Trajectory d =
          integrate_compactified(*c.field, 0.0, x0, 3.0, 1e-3, c.r0);
      const int last = a.size() - 1;
      worst = std::max({worst, m.distance(a.point(last), b.point(last)),
                        m.distance(a.point(last), d.point(last)),
                        m.distance(b.point(last), d.point(last))});
      for (int k = 0; k < d.size(); ++k)
        CHECK_TRUE(m.distance(d.point(k), xs) < c.r0);
    }
    CHECK_TRUE(worst < 1e-4);
    std::printf("    max pairwise final-state deviation (r0 = %g): %.3g\n",
                c.r0, worst);
  }
  return ok;
}

bool criterion_curved_scenario_converges() {
  bool ok = true;
  const Scenario s =
      build_example_hyperbolic(1.0, DCoefficient::two_plus_sin());

  const CheckReport attraction = verify_uniform_attraction(
      s.field, s.run.x0_list, s.run.t0_list, s.run.eps, s.run.t_budget,
      s.run.h0);
  CHECK_TRUE(attraction.verdict == Verdict::kPass);
  CHECK_TRUE(attraction.n_samples == 88);
  std::printf("    %s\n", attraction.details.c_str());

  const auto grid = polar_grid(s.field, GridSpec{});
  CHECK_TRUE(check_sandwich(s.candidate, s.field, grid).verdict ==
             Verdict::kPass);
  CHECK_TRUE(check_decrease(s.candidate, s.field, grid).verdict ==
             Verdict::kPass);
  CHECK_TRUE(check_properness(s.candidate, s.field).verdict ==
             Verdict::kPass);
  return ok;
}

bool criterion_fd_matches_closed_decay() {
  bool ok = true;
  const Scenario s =
      build_example_hyperbolic(1.0, DCoefficient::constant(1.0));
  const Manifold& m = s.manifold;
  const ManifoldPoint xs = s.field.equilibrium();

  // spot value at (0, 2): Vdot = -6 ln 2
  const double spot = fd_vdot(s.candidate, s.field, 0.0,
                              m.point(vec2(0.0, 2.0)));
  CHECK_TRUE(std::abs(spot + 6.0 * std::log(2.0)) <
             1e-6 * 6.0 * std::log(2.0));

  double worst_rel = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double r = 0.25 + (3.0 - 0.25) * i / 9.0;
    for (int j = 0; j < 10; ++j) {
      const double theta = 2.0 * kPi * j / 10.0;
      const TangentVec u = m.unit_direction(xs, theta);
      const ManifoldPoint x = m.exp_map(xs, TangentVec{xs, r * u.comps});
      const double vdot = fd_vdot(s.candidate, s.field, 0.3, x);
      const double w3 = s.candidate.W3(x);
      worst_rel = std::max(worst_rel, std::abs(vdot + w3) / std::abs(w3));
    }
  }
  CHECK_TRUE(worst_rel < 1e-6);
  std::printf("    max relative |Vdot + W3| over 100 grid points: %.3g\n",
              worst_rel);
  return ok;
}

bool criterion_flat_scenario_barrier() {
  bool ok = true;
  const Scenario s = build_example_euclidean(1.0);
  CHECK_TRUE(s.field.domain_radius() == 1.0);

  CHECK_TRUE(check_barrier(s.candidate, s.field, GridSpec{}).verdict ==
             Verdict::kPass);

  // runs released just inside the domain stay inside and converge
  const Manifold& m = s.manifold;
  const ManifoldPoint xs = s.field.equilibrium();
  for (int j = 0; j < 4; ++j) {
    const TangentVec u = m.unit_direction(xs, 2.0 * kPi * j / 4.0);
    const ManifoldPoint x0 = m.exp_map(xs, TangentVec{xs, 0.99 * u.comps});
    const Trajectory traj = integrate_chart(s.field, 0.0, x0, 20.0, 1e-3);
    for (int k = 0; k < traj.size(); ++k)
      CHECK_TRUE(m.distance(traj.point(k), xs) < 1.0);
    CHECK_TRUE(m.distance(traj.point(traj.size() - 1), xs) < 1e-3);
  }

  // the same radius-5 request succeeds in the curved metric and is rejected
  // in the flat one, whose domain radius is only 1
  const fs::path euc_cfg =
      write_config("acc_euc", R"({"template": "euclidean_example"})");
  const CmdResult rejected =
      run_cli("doa --config \"" + euc_cfg.string() + "\" --out \"" +
              fresh_dir("acc_euc_doa").string() + "\" --r 1.5");
  CHECK_TRUE(rejected.exit_code == 1);
  CHECK_TRUE(rejected.err.find("r0") != std::string::npos);

  const fs::path hyp_cfg =
      write_config("acc_hyp", R"({"template": "hyperbolic_example"})");
  const fs::path doa_out = fresh_dir("acc_hyp_doa");
  const CmdResult accepted =
      run_cli("doa --config \"" + hyp_cfg.string() + "\" --out \"" +
              doa_out.string() + "\" --r 5");
  CHECK_TRUE(accepted.exit_code == 0);
  if (accepted.exit_code == 0) {
    const nlohmann::json doc =
        nlohmann::json::parse(read_file(doa_out / "doa.json"));
    CHECK_TRUE(std::abs(doc["c"].get<double>() - 24.75) < 1e-9);
  }
  return ok;
}

bool criterion_exponential_envelope() {
  bool ok = true;
  const Scenario s = build_linear_oracle(2, 1.0);
  std::vector<Trajectory> trajs;
  for (double t0 : {0.0, 2.0, 7.0})
    for (const ManifoldPoint& x0 : s.run.x0_list)
      trajs.push_back(integrate_chart(s.field, t0, x0, t0 + 10.0, 1e-3));

  const CheckReport pass =
      verify_exponential_bound(s.candidate, s.field, trajs);
  CHECK_TRUE(pass.verdict == Verdict::kPass);
  std::printf("    %s\n", pass.details.c_str());

  LyapunovCandidate bad = s.candidate;
  bad.exp_constants = ExpConstants{1.0, 1.0, 4.0, 2.0};
  CHECK_TRUE(verify_exponential_bound(bad, s.field, trajs).verdict ==
             Verdict::kFail);
  return ok;
}

bool criterion_injectivity_clauses() {
  bool ok = true;
  CurvatureBounds pinched;
  pinched.sigma = 1.0;
  pinched.delta = 1.0;
  const RadiusInterval iv = injectivity_interval(pinched);
  CHECK_TRUE(std::abs(iv.lower - kPi) < 1e-15);
  CHECK_TRUE(std::abs(iv.upper - kPi) < 1e-15);

  CurvatureBounds open;
  open.nonpositive = true;
  const RadiusInterval iv2 = injectivity_interval(open);
  CHECK_TRUE(std::isinf(iv2.lower) && std::isinf(iv2.upper));

  CurvatureBounds weak;
  weak.sigma = 0.2;
  weak.delta = 1.0;
  bool threw = false;
  try {
    injectivity_interval(weak);
  } catch (const InapplicableError&) {
    threw = true;
  }
  CHECK_TRUE(threw);
  CHECK_TRUE(run_cli("injectivity --sigma 0.2 --delta 1").exit_code == 1);
  CHECK_TRUE(run_cli("injectivity --sigma 1 --delta 1").out ==
             "[3.1415926535897931, 3.1415926535897931]\n");
  return ok;
}

bool criterion_fourth_order() {
  bool ok = true;
  // linear oracle against the exact solution
  const Scenario lin = build_linear_oracle(1, 1.0);
  Eigen::VectorXd one(1);
  one << 1.0;
  const ManifoldPoint x0 = lin.manifold.point(one);
  auto lin_err = [&](double h) {
    const Trajectory t = integrate_chart(lin.field, 0.0, x0, 1.0, h);
    return std::abs(t.coords()(t.size() - 1, 0) - std::exp(-1.0));
  };
  const double ratio_lin = lin_err(0.02) / lin_err(0.01);
  CHECK_TRUE(ratio_lin > 8.0 && ratio_lin < 32.0);
  std::printf("    linear error ratio e(2h)/e(h): %.2f\n", ratio_lin);

  // curved-space run against a closed-form flow. The benchmark fields
  // contract so hard that the worst deviation is a single step's local
  // truncation (fifth order); a rotation flow neither contracts nor expands,
  // so global error accumulates and the fourth order is measurable. The
  // field z' = 1 + z^2 generates the isometric rotation about (0, 1) with
  // exact flow z(t) = (z0 cos t + sin t) / (-z0 sin t + cos t).
  const Manifold half = Manifold::half_plane();
  const VectorField rot(
      half,
      [](double, const Eigen::VectorXd& x) {
        return Eigen::Vector2d(1.0 + x(0) * x(0) - x(1) * x(1),
                               2.0 * x(0) * x(1));
      },
      half.point(vec2(0.0, 1.0)), std::numeric_limits<double>::infinity());
  const std::complex<double> z0(1.0, 3.0);
  const ManifoldPoint y0 = half.point(vec2(z0.real(), z0.imag()));
  auto exact_rot = [&](double t) {
    const std::complex<double> z =
        (z0 * std::cos(t) + std::sin(t)) / (-z0 * std::sin(t) + std::cos(t));
    return half.point(vec2(z.real(), z.imag()));
  };
  auto worst_err = [&](double h) {
    const Trajectory t = integrate_chart(rot, 0.0, y0, 1.0, h);
    double worst = 0.0;
    for (size_t k = 1; k < t.size(); ++k)
      worst = std::max(worst,
                       half.distance(t.point(k), exact_rot(t.times()[k])));
    return worst;
  };
  const double ratio_hyp = worst_err(0.02) / worst_err(0.01);
  CHECK_TRUE(ratio_hyp > 8.0 && ratio_hyp < 32.0);
  std::printf("    curved error ratio e(2h)/e(h): %.2f\n", ratio_hyp);
  return ok;
}

bool criterion_cli_determinism() {
  bool ok = true;
  const fs::path cfg =
      write_config("acc_det", R"({"template": "hyperbolic_example"})");

  auto dir_contents = [](const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
      files[entry.path().filename().string()] = read_file(entry.path());
    return files;
  };

  const fs::path a = fresh_dir("acc_det_a");
  const fs::path b = fresh_dir("acc_det_b");
  CHECK_TRUE(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                     a.string() + "\"").exit_code == 0);
  CHECK_TRUE(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                     b.string() + "\"").exit_code == 0);
  const auto fa = dir_contents(a);
  const auto fb = dir_contents(b);
  CHECK_TRUE(fa.size() == 90);  // 88 runs + distances.csv + manifest.json
  CHECK_TRUE(fa == fb);

  const fs::path va = fresh_dir("acc_det_va");
  const fs::path vb = fresh_dir("acc_det_vb");
  CHECK_TRUE(run_cli("verify --config \"" + cfg.string() + "\" --out \"" +
                     va.string() + "\"").exit_code == 0);
  CHECK_TRUE(run_cli("verify --config \"" + cfg.string() + "\" --out \"" +
                     vb.string() + "\"").exit_code == 0);
  CHECK_TRUE(dir_contents(va) == dir_contents(vb));
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)();
  };
  const Criterion criteria[] = {
      {"geodesic distance matches tangent norm along exp rays",
       criterion_exp_ray_isometry},
      {"closed-form and gradient log maps agree", criterion_log_routes_agree},
      {"chart, pullback and compactified integrators agree",
       criterion_integrator_equivalence},
      {"curved scenario: uniform convergence and certificate checks",
       criterion_curved_scenario_converges},
      {"finite-difference decay matches the closed-form floor",
       criterion_fd_matches_closed_decay},
      {"flat scenario: barrier holds, domain radius caps the estimate",
       criterion_flat_scenario_barrier},
      {"linear oracle satisfies its exponential envelope",
       criterion_exponential_envelope},
      {"injectivity intervals follow the curvature clauses",
       criterion_injectivity_clauses},
      {"integrator error scales at fourth order", criterion_fourth_order},
      {"CLI outputs are byte-identical across reruns",
       criterion_cli_determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      std::printf("    unexpected exception: %s\n", e.what());
      ok = false;
    }
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", c.name);
    if (!ok) ++failed;
  }
  return failed;
}
