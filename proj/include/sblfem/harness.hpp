#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sblfem/analysis.hpp"
#include "sblfem/assembly.hpp"
#include "sblfem/femspace.hpp"

namespace sblfem {

enum class SweepMode { Reference, Exact };

struct OutputPaths {
  std::string csv, svg, mesh, solution, reference;
};

/// Parsed configuration file.
struct RunConfig {
  ProblemConfig problem;
  std::vector<int> p_list;
  std::vector<double> eps1_list, eps2_list;
  SweepMode mode = SweepMode::Reference;
  OutputPaths paths;
  std::vector<std::string> warnings;
};

/// Sections [domain] [problem] [mesh] [sweep] [output] with `key = value`
/// lines; '#' and ';' start comments. Throws ConfigError naming the line.
RunConfig parse_config(const std::string& text);
/// Reads the file (IoError if unreadable), then parse_config.
RunConfig load_config(const std::string& path);

/// Named forcing terms: "10x", "inverse-distance", "manufactured-disk".
/// Sets config.f and config.forcing_name; throws ConfigError for unknown
/// names and for an inverse-distance singularity inside the closed domain.
void apply_forcing(ProblemConfig& config, const std::string& name);
/// "2.5" (constant) or "a b c" (a + b x + c y).
void apply_coefficient(ProblemConfig& config, const std::string& spec);

/// Re-applies a manufactured forcing after eps changes.
void refresh_forcing(ProblemConfig& config);

struct SweepSpec {
  ProblemConfig base;
  std::vector<int> p_list;
  std::vector<double> eps1_list, eps2_list;
  SweepMode mode = SweepMode::Reference;
  int threads = 1;
  bool omit_timing = false;  ///< write solve_seconds = 0 for byte-stable output
};

struct SweepRow {
  int p = 0;
  int dofs = 0;
  double eps1 = 0, eps2 = 0;
  double energy_error = 0, balanced_error = 0;
  double solve_seconds = 0;
  std::string regime;
  double residual = 0;            ///< not written to CSV
  double reference_residual = 0;  ///< of the p + 2 solve; not written to CSV
};

SweepSpec make_sweep_spec(const RunConfig& config);

/// Rows ordered by p, then eps1, then eps2, all ascending. Solves at p and p+2
/// are shared between rows. Any failure aborts with the parameter tuple in
/// the message.
std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const std::function<void(const std::string&)>& log = {});

/// Solve at degree p + 2 on its own mesh.
Solution make_reference(const ProblemConfig& config);

extern const char* const kCsvHeader;

std::string write_csv(const std::vector<SweepRow>& rows);
/// Throws IoError with the line number on malformed input.
std::vector<SweepRow> read_csv(const std::string& text);

/// log10(error) vs p; per (eps1, eps2) series a solid energy polyline and a
/// dashed balanced polyline, plus legend and axes. Throws ConfigError on
/// empty data.
std::string emit_plot(const std::vector<SweepRow>& rows, const std::string& title = "");

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

}  // namespace sblfem
