#pragma once

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iga/geometry.hpp"
#include "iga/matrix_io.hpp"
#include "iga/solve.hpp"
#include "iga/surrogate.hpp"

namespace iga {

/// One verification run: assemble the standard and the surrogate stiffness
/// matrix, solve both Poisson systems, and report errors, the matrix
/// difference, and the assembly speed-up.
struct RunConfig {
  int dim = 2;
  int nel = 0;               // 0: 159 in 2D, 39 in 3D (160/40 breakpoints)
  int degree = 2;
  int interp_degree = 3;
  int skip = 10;
  std::string geometry;      // builtin name or geometry file; "" picks the default
  std::string solution = "oscillatory";
  int quad_points = 0;       // 0: degree + 1
  double tol = 1e-12;
  int threads = 1;
  std::string dump_dir;
  std::string csv_path;
};

struct RunReport {
  RunConfig config;          // resolved values
  double t_assembly_std = 0.0;
  double t_assembly_surr = 0.0;
  double t_solve_std = 0.0;
  double t_solve_surr = 0.0;
  int iters_std = 0;
  int iters_surr = 0;
  ErrorPair err_std;
  ErrorPair err_surr;
  double max_diff = 0.0;
  double a_max = 0.0;  // largest absolute entry of the exact matrix
  double speedup = 0.0;
  SurrogateTimings surrogate_detail;
};

inline RunConfig resolve_config(RunConfig cfg) {
  if (cfg.dim != 2 && cfg.dim != 3)
    throw std::invalid_argument("config: dim must be 2 or 3");
  if (cfg.nel == 0) cfg.nel = cfg.dim == 2 ? 159 : 39;
  if (cfg.geometry.empty())
    cfg.geometry = cfg.dim == 2 ? "quarter_annulus_bumps" : "bent_box";
  if (cfg.quad_points == 0) cfg.quad_points = cfg.degree + 1;
  if (cfg.degree < 1) throw std::invalid_argument("config: degree must be >= 1");
  if (cfg.nel < 1) throw std::invalid_argument("config: nel must be >= 1");
  if (cfg.interp_degree != 1 && cfg.interp_degree != 3)
    throw std::invalid_argument("config: interp-degree must be 1 or 3");
  if (cfg.skip < 1) throw std::invalid_argument("config: skip must be >= 1");
  if (cfg.quad_points < 1 || cfg.quad_points > 10)
    throw std::invalid_argument("config: quad-points must be in [1,10]");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0))
    throw std::invalid_argument("config: tol must be in (0,1)");
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  return cfg;
}

inline PatchMap load_geometry(const std::string& name, int dim) {
  if (name == "identity" || name == "quarter_annulus" || name == "quarter_annulus_bumps" ||
      name == "bent_box")
    return builtin_geometry(name, dim);
  if (std::filesystem::exists(name)) {
    PatchMap g = read_geometry_file(name);
    if (g.dim != dim)
      throw std::invalid_argument("config: geometry file dimension does not match --dim");
    return g;
  }
  throw std::invalid_argument("config: unknown geometry '" + name + "'");
}

inline RunReport run(const RunConfig& raw) {
  using clock = std::chrono::steady_clock;
  const auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  RunReport rep;
  rep.config = resolve_config(raw);
  const RunConfig& cfg = rep.config;

  const TensorSpace space =
      make_tensor_space(cfg.dim, make_open_uniform_knots(cfg.degree, cfg.nel));
  const PatchMap geom = load_geometry(cfg.geometry, cfg.dim);
  const GaussRule rule = gauss_rule(cfg.quad_points);
  const ManufacturedCase mc = manufactured_case(cfg.solution, cfg.dim);
  const SurrogateConfig scfg{cfg.skip, cfg.interp_degree};
  detail::validate_surrogate_config(space, scfg);

  auto t = clock::now();
  const SparseMatrix A = assemble_stiffness(space, geom, rule, nullptr, cfg.threads);
  rep.t_assembly_std = seconds(t, clock::now());

  const std::vector<double> load = assemble_load(space, geom, rule, mc.f, cfg.threads);

  t = clock::now();
  const DirichletSystem sys_std = apply_dirichlet(A, load, mc.u, space, geom);
  const SolveInfo sol_std = solve_reduced(sys_std, space, cfg.tol);
  rep.t_solve_std = seconds(t, clock::now());
  rep.iters_std = sol_std.iterations;

  t = clock::now();
  const SparseMatrix A_surr =
      assemble_surrogate(space, geom, rule, scfg, cfg.threads, &rep.surrogate_detail);
  rep.t_assembly_surr = seconds(t, clock::now());

  t = clock::now();
  const DirichletSystem sys_surr = apply_dirichlet(A_surr, load, mc.u, space, geom);
  const SolveInfo sol_surr = solve_reduced(sys_surr, space, cfg.tol);
  rep.t_solve_surr = seconds(t, clock::now());
  rep.iters_surr = sol_surr.iterations;

  const GaussRule error_rule = gauss_rule(std::min(cfg.degree + 2, 10));
  rep.err_std = compute_errors(space, geom, sol_std.solution, mc, error_rule, cfg.threads);
  rep.err_surr = compute_errors(space, geom, sol_surr.solution, mc, error_rule, cfg.threads);
  rep.max_diff = matrix_max_diff(A, A_surr);
  rep.a_max = A.max_abs();
  rep.speedup = rep.t_assembly_std / rep.t_assembly_surr;

  if (!cfg.dump_dir.empty()) {
    std::filesystem::create_directories(cfg.dump_dir);
    write_matrix_market_file((std::filesystem::path(cfg.dump_dir) / "standard.mtx").string(),
                             A, true);
    write_matrix_market_file((std::filesystem::path(cfg.dump_dir) / "surrogate.mtx").string(),
                             A_surr, true);
  }
  return rep;
}

inline void print_report(std::ostream& os, const RunReport& r) {
  const RunConfig& c = r.config;
  char buf[256];
  os << "config: dim=" << c.dim << " nel=" << c.nel << " degree=" << c.degree
     << " interp_degree=" << c.interp_degree << " skip=" << c.skip << " geometry=" << c.geometry
     << " solution=" << c.solution << " quad_points=" << c.quad_points
     << " threads=" << c.threads << "\n";
  std::snprintf(buf, sizeof(buf), "standard assembly time:  %.6f s\n", r.t_assembly_std);
  os << buf;
  std::snprintf(buf, sizeof(buf), "standard solve time:     %.6f s (%d iterations)\n",
                r.t_solve_std, r.iters_std);
  os << buf;
  std::snprintf(buf, sizeof(buf), "surrogate assembly time: %.6f s\n", r.t_assembly_surr);
  os << buf;
  std::snprintf(buf, sizeof(buf), "surrogate solve time:    %.6f s (%d iterations)\n",
                r.t_solve_surr, r.iters_surr);
  os << buf;
  std::snprintf(buf, sizeof(buf), "relative errors (standard):  L2 %.6e   H1 %.6e\n",
                r.err_std.l2, r.err_std.h1);
  os << buf;
  std::snprintf(buf, sizeof(buf), "relative errors (surrogate): L2 %.6e   H1 %.6e\n",
                r.err_surr.l2, r.err_surr.h1);
  os << buf;
  std::snprintf(buf, sizeof(buf), "max matrix difference:   %.6e\n", r.max_diff);
  os << buf;
  std::snprintf(buf, sizeof(buf), "assembly speed-up:       %.2f\n", r.speedup);
  os << buf;
}

inline std::string csv_header() {
  return "dim,nel,degree,interp_degree,skip,geometry,solution,quad_points,threads,tol,"
         "t_assembly_std,t_assembly_surr,t_solve_std,t_solve_surr,cg_iters_std,cg_iters_surr,"
         "l2_std,h1_std,l2_surr,h1_surr,max_diff,a_max,speedup,status,message";
}

inline std::string csv_row(const RunReport& r, const std::string& status,
                           std::string message) {
  for (char& ch : message)
    if (ch == ',' || ch == '\n') ch = ';';
  const RunConfig& c = r.config;
  std::ostringstream os;
  char buf[512];
  os << c.dim << ',' << c.nel << ',' << c.degree << ',' << c.interp_degree << ',' << c.skip
     << ',' << c.geometry << ',' << c.solution << ',' << c.quad_points << ',' << c.threads
     << ',' << c.tol << ',';
  if (status == "ok") {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.6f,%.6f,%.6f,%d,%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.4f",
                  r.t_assembly_std, r.t_assembly_surr, r.t_solve_std, r.t_solve_surr,
                  r.iters_std, r.iters_surr, r.err_std.l2, r.err_std.h1, r.err_surr.l2,
                  r.err_surr.h1, r.max_diff, r.a_max, r.speedup);
    os << buf;
  } else {
    os << ",,,,,,,,,,,,";
  }
  os << ',' << status << ',' << message;
  return os.str();
}

/// Sweep configuration files are blocks of key=value lines separated by blank
/// lines; '#' starts a comment. Keys match the CLI flag names. Every block
/// starts from the base configuration and overrides the given keys.
inline std::vector<RunConfig> parse_sweep_file(const std::string& path,
                                               const RunConfig& base) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("sweep: cannot open config file " + path);
  std::vector<RunConfig> configs;
  RunConfig cur = base;
  bool block_open = false;
  std::string line;
  auto flush = [&] {
    if (block_open) configs.push_back(cur);
    cur = base;
    block_open = false;
  };
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    if (trimmed.empty()) {
      flush();
      continue;
    }
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("sweep: expected key=value at line " +
                                  std::to_string(lineno));
    const std::string key = trimmed.substr(0, eq);
    const std::string value = trimmed.substr(eq + 1);
    try {
      if (key == "dim")
        cur.dim = std::stoi(value);
      else if (key == "nel")
        cur.nel = std::stoi(value);
      else if (key == "degree")
        cur.degree = std::stoi(value);
      else if (key == "interp-degree" || key == "interp_degree")
        cur.interp_degree = std::stoi(value);
      else if (key == "skip")
        cur.skip = std::stoi(value);
      else if (key == "geometry")
        cur.geometry = value;
      else if (key == "solution")
        cur.solution = value;
      else if (key == "quad-points" || key == "quad_points")
        cur.quad_points = std::stoi(value);
      else if (key == "tol")
        cur.tol = std::stod(value);
      else if (key == "threads")
        cur.threads = std::stoi(value);
      else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep: line " + std::to_string(lineno) + ": " + e.what());
    }
    block_open = true;
  }
  flush();
  return configs;
}

/// Runs every configuration, one CSV row per run. Failures are recorded in
/// the status/message columns and the sweep continues.
inline int sweep(const std::vector<RunConfig>& configs, std::ostream& csv, std::ostream& log) {
  csv << csv_header() << "\n";
  int failures = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    RunReport rep;
    rep.config = configs[k];
    try {
      rep.config = resolve_config(configs[k]);
      rep = run(configs[k]);
      csv << csv_row(rep, "ok", "") << "\n";
      log << "run " << k + 1 << "/" << configs.size() << ": ok\n";
    } catch (const std::exception& e) {
      ++failures;
      csv << csv_row(rep, "error", e.what()) << "\n";
      log << "run " << k + 1 << "/" << configs.size() << ": error: " << e.what() << "\n";
    }
    csv.flush();
  }
  return failures;
}

}  // namespace iga
