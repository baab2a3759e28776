#include <exception>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "iga/runner.hpp"

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int main(int argc, char** argv) {
  CLI::App app{
      "Poisson stiffness assembly on a spline patch: standard Galerkin quadrature "
      "versus surrogate assembly with interpolated stencil functions."};

  iga::RunConfig cfg;
  std::string sweep_file;
  app.add_option("--dim", cfg.dim, "Space dimension (2 or 3)")->capture_default_str();
  app.add_option("--nel", cfg.nel,
                 "Elements per direction (0 picks the default: 159 in 2D, 39 in 3D)");
  app.add_option("--degree", cfg.degree, "B-spline degree of the analysis space")
      ->capture_default_str();
  app.add_option("--interp-degree", cfg.interp_degree,
                 "Spline degree of the stencil interpolation (1 or 3)")
      ->capture_default_str();
  app.add_option("--skip", cfg.skip, "Skip parameter M of the sample lattice")
      ->capture_default_str();
  app.add_option("--geometry", cfg.geometry,
                 "Geometry: identity, quarter_annulus, quarter_annulus_bumps, bent_box, or a "
                 "geometry file path (default depends on --dim)");
  app.add_option("--solution", cfg.solution, "Manufactured solution: oscillatory or smooth")
      ->capture_default_str();
  app.add_option("--quad-points", cfg.quad_points,
                 "Gauss points per direction per element (0 picks degree+1)");
  app.add_option("--tol", cfg.tol, "Relative residual tolerance of the CG solver")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads for assembly and error quadrature")
      ->capture_default_str();
  app.add_option("--dump-matrices", cfg.dump_dir,
                 "Write standard.mtx and surrogate.mtx (Matrix Market) into this directory");
  app.add_option("--csv", cfg.csv_path, "Append-free CSV report path (header + one row per run)");
  app.add_option("--sweep", sweep_file,
                 "Run every block of a key=value sweep file (blocks separated by blank lines); "
                 "other flags provide the base configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (!sweep_file.empty()) {
      const auto configs = iga::parse_sweep_file(sweep_file, cfg);
      std::ofstream csv_stream;
      std::ostream* csv = &std::cout;
      if (!cfg.csv_path.empty()) {
        csv_stream.open(cfg.csv_path);
        if (!csv_stream)
          throw std::invalid_argument("config: cannot open csv path " + cfg.csv_path);
        csv = &csv_stream;
      }
      iga::sweep(configs, *csv, std::cerr);
      return 0;
    }
    const iga::RunReport report = iga::run(cfg);
    iga::print_report(std::cout, report);
    if (!cfg.csv_path.empty()) {
      std::ofstream os(cfg.csv_path);
      if (!os) throw std::invalid_argument("config: cannot open csv path " + cfg.csv_path);
      os << iga::csv_header() << "\n" << iga::csv_row(report, "ok", "") << "\n";
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
