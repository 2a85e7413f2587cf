// Command-line front end: simulate | verify | doa | injectivity.
//
// Exit codes: 0 success, 1 bad arguments or config (including out-of-range
// requests), 2 integration failure, 3 a claimed check failed (the report is
// still written).

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "manistab/curvature.hpp"
#include "manistab/errors.hpp"
#include "manistab/lyapunov.hpp"
#include "manistab/scenario.hpp"
#include "manistab/version.hpp"

namespace fs = std::filesystem;
using namespace manistab;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("cannot write \"" + path.string() + "\"");
}

Scenario load_config(const std::string& path) {
  Scenario s = load_scenario(read_file(path));
  for (const std::string& w : s.warnings) std::cerr << "warning: " << w << "\n";
  return s;
}

// Every stride-th sample plus the final one.
Trajectory thin_trajectory(const Manifold& m, const Trajectory& tr,
                           int stride) {
  std::vector<int> keep;
  for (int k = 0; k < tr.size(); k += stride) keep.push_back(k);
  if (keep.back() != tr.size() - 1) keep.push_back(tr.size() - 1);
  std::vector<double> times;
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(keep.size()),
                         tr.coords().cols());
  for (size_t j = 0; j < keep.size(); ++j) {
    times.push_back(tr.times()[static_cast<size_t>(keep[j])]);
    coords.row(static_cast<Eigen::Index>(j)) = tr.coords().row(keep[j]);
  }
  return Trajectory(m, std::move(times), std::move(coords),
                    tr.integrator_tag());
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 int stride) {
  const Scenario s = load_config(config_path);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<std::string> files;
  std::vector<Trajectory> thinned;
  std::vector<double> run_t0;
  for (size_t i = 0; i < s.run.t0_list.size(); ++i) {
    const double t0 = s.run.t0_list[i];
    for (size_t k = 0; k < s.run.x0_list.size(); ++k) {
      const Trajectory traj = integrate_chart(
          s.field, t0, s.run.x0_list[k], t0 + s.run.t_max, s.run.h0);
      const Trajectory th = thin_trajectory(s.manifold, traj, stride);
      char name[40];
      std::snprintf(name, sizeof name, "traj_%02d_%d.csv",
                    static_cast<int>(i), static_cast<int>(k));
      std::ofstream csv(out / name, std::ios::binary);
      write_csv(th, csv);
      if (!csv) throw std::runtime_error("cannot write trajectory CSV");
      files.emplace_back(name);
      thinned.push_back(th);
      run_t0.push_back(t0);
    }
  }

  // Envelope of the distance to the equilibrium: row k pairs the k-th sample
  // of every run (all runs share the same time offsets) and keeps the max.
  std::string dist_csv = "t,rho\n";
  for (int k = 0; k < thinned.front().size(); ++k) {
    double rho_max = 0.0;
    for (size_t r = 0; r < thinned.size(); ++r)
      rho_max = std::max(rho_max, s.manifold.distance(thinned[r].point(k),
                                                      s.field.equilibrium()));
    const double offset = thinned.front().times()[static_cast<size_t>(k)] -
                          run_t0.front();
    dist_csv += g17(offset) + "," + g17(rho_max) + "\n";
  }
  write_text(out / "distances.csv", dist_csv);
  files.emplace_back("distances.csv");

  const nlohmann::json manifest = {
      {"command", "simulate"}, {"scenario", s.name},
      {"version", kVersion},   {"stride", stride},
      {"n_runs", static_cast<int>(thinned.size())},
      {"files", files},        {"config", s.config}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "simulate: " << s.name << ": " << thinned.size()
            << " runs, " << thinned.front().size() << " rows per file -> "
            << out_dir << "\n";
  return 0;
}

int run_verify(const std::string& config_path, const std::string& out_dir,
               const GridSpec& spec) {
  const Scenario s = load_config(config_path);
  fs::create_directories(out_dir);
  const std::vector<GridSample> grid = polar_grid(s.field, spec);

  nlohmann::json claims = nlohmann::json::array();
  bool all_pass = true;
  for (const std::string& claim : s.claims) {
    CheckReport rep;
    if (claim == "sandwich") {
      rep = check_sandwich(s.candidate, s.field, grid);
    } else if (claim == "decrease") {
      rep = check_decrease(s.candidate, s.field, grid);
    } else if (claim == "properness") {
      rep = check_properness(s.candidate, s.field);
    } else if (claim == "barrier") {
      rep = check_barrier(s.candidate, s.field, spec);
    } else if (claim == "exponential_bound") {
      std::vector<Trajectory> trajs;
      for (double t0 : s.run.t0_list)
        for (const ManifoldPoint& x0 : s.run.x0_list)
          trajs.push_back(integrate_chart(s.field, t0, x0, t0 + s.run.t_max,
                                          s.run.h0));
      rep = verify_exponential_bound(s.candidate, s.field, trajs);
    } else if (claim == "uniform_attraction") {
      rep = verify_uniform_attraction(s.field, s.run.x0_list, s.run.t0_list,
                                      s.run.eps, s.run.t_budget, s.run.h0);
    } else {
      throw ConfigError("scenario claims unknown check \"" + claim + "\"");
    }
    std::cout << claim << ": " << to_string(rep.verdict) << " (samples "
              << rep.n_samples << ", worst margin " << rep.worst_margin
              << ")\n";
    claims.push_back({{"name", claim}, {"report", to_json(rep)}});
    if (rep.verdict != Verdict::kPass) all_pass = false;
  }

  const nlohmann::json report = {
      {"command", "verify"},     {"scenario", s.name},
      {"version", kVersion},     {"claims", claims},
      {"warnings", s.warnings},  {"overall", all_pass ? "pass" : "fail"},
      {"config", s.config}};
  write_text(fs::path(out_dir) / "report.json", report.dump(2) + "\n");

  std::cout << "verify: " << s.name << ": " << (all_pass ? "pass" : "fail")
            << "\n";
  return all_pass ? 0 : 3;
}

int run_doa(const std::string& config_path, const std::string& out_dir,
            double r) {
  const Scenario s = load_config(config_path);
  const int n_dirs = 64;
  const DoaEstimate est = estimate_doa(s.candidate, s.field, r, n_dirs);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  // Level-set boundary along each ray: the largest sub-radius whose point
  // still satisfies W2 <= c, by bisection on [0, r].
  const ManifoldPoint xs = s.field.equilibrium();
  std::string csv = "theta";
  for (int c = 0; c < s.manifold.coord_size(); ++c)
    csv += ",coord_" + std::to_string(c);
  csv += "\n";
  for (int j = 0; j < n_dirs; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / n_dirs;
    const TangentVec u = s.manifold.unit_direction(xs, theta);
    double lo = 0.0;
    double hi = est.r;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const ManifoldPoint p =
          s.manifold.exp_map(xs, TangentVec{xs, mid * u.comps});
      if (s.candidate.W2(p) <= est.c)
        lo = mid;
      else
        hi = mid;
    }
    const ManifoldPoint p =
        s.manifold.exp_map(xs, TangentVec{xs, lo * u.comps});
    csv += g17(theta);
    for (Eigen::Index c = 0; c < p.coords.size(); ++c)
      csv += "," + g17(p.coords(c));
    csv += "\n";
  }
  write_text(out / "doa_boundary.csv", csv);

  const nlohmann::json doc = {
      {"command", "doa"},
      {"scenario", s.name},
      {"version", kVersion},
      {"r", est.r},
      {"c", est.c},
      {"ring_min", est.ring_min},
      {"n_directions", n_dirs},
      {"files", {"doa_boundary.csv"}},
      {"config", s.config}};
  write_text(out / "doa.json", doc.dump(2) + "\n");

  std::cout << "doa: " << s.name << ": r=" << est.r << " c=" << est.c
            << " (ring min " << est.ring_min << ")\n";
  return 0;
}

int run_injectivity(const CurvatureBounds& bounds) {
  const RadiusInterval iv = injectivity_interval(bounds);
  std::printf("[%s, %s]\n", g17(iv.lower).c_str(), g17(iv.upper).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numeric stability certification on Riemannian charts"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int stride = 50;
  double doa_r = 0.0;
  GridSpec spec;

  CLI::App* sim = app.add_subcommand(
      "simulate", "integrate the scenario runs and write trajectory CSVs");
  sim->add_option("--config", config_path, "scenario config JSON")->required();
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--stride", stride, "output row thinning stride")
      ->check(CLI::PositiveNumber);

  CLI::App* ver = app.add_subcommand(
      "verify", "run the scenario's claimed checks and write report.json");
  ver->add_option("--config", config_path, "scenario config JSON")->required();
  ver->add_option("--out", out_dir, "output directory")->required();
  ver->add_option("--grid-radii", spec.n_radii, "radial grid resolution")
      ->check(CLI::PositiveNumber);
  ver->add_option("--grid-dirs", spec.n_dirs, "angular grid resolution")
      ->check(CLI::PositiveNumber);
  ver->add_option("--grid-times", spec.n_times, "time grid resolution")
      ->check(CLI::PositiveNumber);

  CLI::App* doa = app.add_subcommand(
      "doa", "estimate a positively invariant sublevel set of radius r");
  doa->add_option("--config", config_path, "scenario config JSON")->required();
  doa->add_option("--out", out_dir, "output directory")->required();
  doa->add_option("--r", doa_r, "geodesic radius of the estimate")
      ->required()
      ->check(CLI::PositiveNumber);

  CLI::App* inj = app.add_subcommand(
      "injectivity", "injectivity radius interval from curvature bounds");
  double sigma = 0.0;
  double delta = 0.0;
  double loop = 0.0;
  bool nonpositive = false;
  bool compact = false;
  CLI::Option* sigma_opt =
      inj->add_option("--sigma", sigma, "lower sectional curvature bound");
  CLI::Option* delta_opt =
      inj->add_option("--delta", delta, "upper sectional curvature bound");
  CLI::Option* loop_opt = inj->add_option(
      "--loop", loop, "length of the shortest closed geodesic");
  inj->add_flag("--nonpositive", nonpositive,
                "curvature is nonpositive everywhere (simply connected)");
  inj->add_flag("--compact", compact, "the manifold is compact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return run_simulate(config_path, out_dir, stride);
    if (ver->parsed()) return run_verify(config_path, out_dir, spec);
    if (doa->parsed()) return run_doa(config_path, out_dir, doa_r);
    CurvatureBounds bounds;
    if (sigma_opt->count() > 0) bounds.sigma = sigma;
    if (delta_opt->count() > 0) bounds.delta = delta;
    if (loop_opt->count() > 0) bounds.shortest_loop_length = loop;
    bounds.nonpositive = nonpositive;
    bounds.compact = compact;
    return run_injectivity(bounds);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InapplicableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StiffnessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
