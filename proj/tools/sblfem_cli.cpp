// Command-line driver: mesh, solve, reference, sweep, plot.

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sblfem/analysis.hpp"
#include "sblfem/errors.hpp"
#include "sblfem/harness.hpp"
#include "sblfem/mesh.hpp"
#include "sblfem/solver.hpp"

using namespace sblfem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

void warn_all(const RunConfig& rc) {
  for (const auto& w : rc.warnings) std::cerr << "warning: " << w << '\n';
}

std::string pick(const std::string& flag, const std::string& fallback) {
  return flag.empty() ? fallback : flag;
}

int cmd_mesh(const std::string& config_path, const std::string& format, const std::string& out) {
  RunConfig rc = load_config(config_path);
  warn_all(rc);
  const ProblemConfig& pc = rc.problem;
  validate_parameters(pc);
  auto base = build_asymptotic_mesh(pc.curve, pc.m, pc.strip_fraction);
  auto mesh = build_sbl_mesh(base, pc.kappa, pc.p, pc.eps1, pc.eps2);
  auto report = check_admissibility(*mesh, pc.quadrature());
  std::printf("elements %d (asymptotic %d, boundary %d)  regime %s%s\n", mesh->size(), base->size(),
              base->num_boundary, to_string(mesh->regime), mesh->clamped ? "  [clamped]" : "");
  std::printf("min det J %.6e  worst edge mismatch %.3e\n", report.global_min_det(),
              report.worst_edge_mismatch);
  const std::string path = pick(out, rc.paths.mesh);
  if (!path.empty()) {
    write_file(path, export_mesh(*mesh, format == "svg" ? MeshFormat::Svg : MeshFormat::Json));
    std::printf("wrote %s\n", path.c_str());
  }
  if (!report.positive()) {
    std::fprintf(stderr, "error: mesh has nonpositive Jacobian\n");
    return kNumerical;
  }
  return kOk;
}

int cmd_solve(const std::string& config_path, const std::string& out, int threads) {
  RunConfig rc = load_config(config_path);
  warn_all(rc);
  SolveOptions opt;
  opt.threads = threads;
  Solution sol = solve_problem(rc.problem, opt);
  std::printf("p %d  dofs %d  regime %s  residual %.3e\n", sol.p, sol.dofs(),
              to_string(sol.mesh->regime), sol.residual);
  NormParts parts = solution_norm_parts(sol);
  std::printf("energy norm %.10e  balanced norm %.10e\n", energy_norm(parts, sol.eps2),
              balanced_norm(parts, sol.eps1, sol.eps2));
  if (rc.problem.forcing_name == "manufactured-disk") {
    auto rep = error_against_exact(sol, ManufacturedCase{sol.eps1, sol.eps2});
    std::printf("exact error: energy %.6e  balanced %.6e\n", rep.energy_error, rep.balanced_error);
  }
  const std::string path = pick(out, rc.paths.solution);
  if (!path.empty()) {
    write_file(path, serialize_solution(sol));
    std::printf("wrote %s\n", path.c_str());
  }
  return kOk;
}

int cmd_reference(const std::string& config_path, const std::string& out) {
  RunConfig rc = load_config(config_path);
  warn_all(rc);
  Solution ref = make_reference(rc.problem);
  std::printf("reference p %d  dofs %d  regime %s  residual %.3e\n", ref.p, ref.dofs(),
              to_string(ref.mesh->regime), ref.residual);
  const std::string path = pick(out, rc.paths.reference);
  if (path.empty()) throw ConfigError("no output path for the reference (use -o or [output] reference)");
  write_file(path, serialize_solution(ref));
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out, int threads,
              bool single_thread, bool omit_timing, bool quiet) {
  RunConfig rc = load_config(config_path);
  warn_all(rc);
  SweepSpec spec = make_sweep_spec(rc);
  spec.threads = single_thread ? 1 : threads;
  spec.omit_timing = omit_timing;
  auto rows = run_sweep(spec, [&](const std::string& msg) {
    if (!quiet) std::cerr << msg << '\n';
  });
  const std::string csv = write_csv(rows);
  const std::string path = pick(out, rc.paths.csv);
  if (path.empty()) std::fputs(csv.c_str(), stdout);
  else write_file(path, csv);
  if (!rc.paths.svg.empty()) write_file(rc.paths.svg, emit_plot(rows));
  return kOk;
}

int cmd_plot(const std::string& csv_path, const std::string& out, const std::string& title) {
  auto rows = read_csv(read_file(csv_path));
  const std::string svg = emit_plot(rows, title);
  if (out.empty()) std::fputs(svg.c_str(), stdout);
  else write_file(out, svg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed hp finite elements for fourth-order singularly perturbed problems"};
  app.require_subcommand(1);

  std::string config, out, format = "json", title, csv;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool single_thread = false, omit_timing = false, quiet = false;

  auto* mesh = app.add_subcommand("mesh", "build the boundary layer mesh and export it");
  mesh->add_option("config", config, "configuration file")->required();
  mesh->add_option("-o,--output", out, "output path (overrides [output] mesh)");
  mesh->add_option("-f,--format", format, "json or svg")->check(CLI::IsMember({"json", "svg"}));

  auto* solve = app.add_subcommand("solve", "solve one configuration");
  solve->add_option("config", config, "configuration file")->required();
  solve->add_option("-o,--output", out, "solution JSON (overrides [output] solution)");
  solve->add_option("-j,--threads", threads, "assembly threads")->check(CLI::PositiveNumber);

  auto* reference = app.add_subcommand("reference", "solve at degree p+2 and store the result");
  reference->add_option("config", config, "configuration file")->required();
  reference->add_option("-o,--output", out, "solution JSON (overrides [output] reference)");

  auto* sweep = app.add_subcommand("sweep", "convergence study over p, eps1 and eps2");
  sweep->add_option("config", config, "configuration file")->required();
  sweep->add_option("-o,--output", out, "CSV path (overrides [output] csv; default stdout)");
  sweep->add_option("-j,--threads", threads, "parallel solves")->check(CLI::PositiveNumber);
  sweep->add_flag("--single-thread", single_thread, "one solve at a time");
  sweep->add_flag("--omit-timing", omit_timing, "write solve_seconds = 0 (byte-stable CSV)");
  sweep->add_flag("-q,--quiet", quiet, "no progress output");

  auto* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
  plot->add_option("csv", csv, "sweep CSV")->required();
  plot->add_option("-o,--output", out, "SVG path (default stdout)");
  plot->add_option("-t,--title", title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*mesh) return cmd_mesh(config, format, out);
    if (*solve) return cmd_solve(config, out, threads);
    if (*reference) return cmd_reference(config, out);
    if (*sweep) return cmd_sweep(config, out, threads, single_thread, omit_timing, quiet);
    if (*plot) return cmd_plot(csv, out, title);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const GeometryError& e) {
    std::cerr << "numerical failure (geometry): " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
