#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlt/diagnostics.hpp"

namespace nlt {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { run, sweep, compare, check };

std::string_view to_string(ExperimentKind kind);

struct ModelSpec {
  std::string kind = "affine";  // affine | custom
  double a = 1.0, b = 1.0;
  // custom: concave_quadratic v0 (1 - r^2) or mixed_quadratic v0 (1 - kappa r - (1 - kappa) r^2), r = rho / rho_jam
  std::string name;
  double v0 = 1.0;
  double rho_jam = 1.0;
  double kappa = 0.5;

  VelocityModel build() const;
};

/// Named non-affine speed laws with closed-form derivatives and inverse.
VelocityModel named_model(const std::string& name, double v0, double rho_jam, double kappa);

struct RandomBv {
  double lo = 0.1, hi = 0.9;
  int pieces = 12;
};

struct InitialSpec {
  std::string preset;  // riemann | bump | sine | ramp | constant | random_bv
  InitialPreset shape = preset::Custom{};
  RandomBv random;
  std::uint64_t seed = 1;
};

/// Piecewise-constant field with `pieces` random levels in [lo, hi] and random breakpoints.
DensityField random_bv_field(const Grid& grid, std::mt19937_64& rng, double lo, double hi, int pieces);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::run;
  ModelSpec model;
  double x_min = 0.0, x_max = 1.0;
  int n_cells = 0;
  Boundary boundary = Boundary::constant_extension;
  InitialSpec initial;
  std::vector<double> epsilons;  // one entry unless kind == sweep
  bool relaxation = false;
  std::optional<double> K;
  SolverConfig solver;
  std::vector<TestFunction> test_functions;
  int check_samples = 1000;
  std::optional<double> check_rho1, check_rho2;
  std::string output_dir = "out";
  std::string canonical;  // normalised document, hashed into report metadata

  Grid grid() const { return Grid(x_min, x_max, n_cells, boundary); }
  DensityField initial_field() const;
  std::uint64_t hash() const;
};

/// Parses a flat JSON object whose keys are dotted names ("model.kind", "grid.n_cells", ...);
/// // and /* */ comments are allowed. Unknown keys, missing required keys and out-of-domain
/// values throw Error(config) naming the key. See README for the key list. `kind` supplies the
/// experiment kind when the document has no "experiment.kind"; a conflicting value is rejected.
ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> kind = {});
ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind = {});

/// Distance from each boundary to the nearest non-constant cell, minus v(0) t_final. Negative
/// means waves may reach a constant-extension boundary within the run.
double boundary_clearance(const DensityField& initial, const VelocityModel& model, double t_final);

struct SweepRow {
  double epsilon = 0.0;
  double l1_to_reference = 0.0;
  double tv_final = 0.0;
  std::optional<double> tv_bound;  // needs uniformly positive data
  double maxp_margin = 0.0;
  double kdev_margin = 0.0;
  double entropy_pos_part = 0.0;
  double runtime_seconds = 0.0;
  std::vector<double> entropy_residuals;
  std::optional<std::string> error;
};

struct ReportMetadata {
  std::string config_hash;
  std::string version = kVersion;
  std::string kind;
  double x_min = 0.0, x_max = 0.0;
  int n_cells = 0;
  std::string boundary;
  double t_final = 0.0;
  std::optional<double> boundary_clearance;
  // Set for non-affine speed laws, where convergence to the entropy solution is not established:
  // the rows are measurements, nothing is asserted about them.
  bool exploratory = false;
};

struct SweepReport {
  ReportMetadata meta;
  std::vector<SweepRow> rows;
  std::optional<double> l1_slope;
  std::optional<double> entropy_slope;
};

/// Least-squares slope of log max(y, 1e-16) against log x. Needs two distinct x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class ReportFormat { csv, json };

std::string emit_report(const SweepReport& report, ReportFormat format);
std::string emit_report(const DiagnosticsReport& report, ReportFormat format);
/// Inverse of the JSON form of a sweep report.
SweepReport parse_sweep_report(const std::string& json_text);

/// Writes `content`, creating parent directories. Throws Error(io).
void write_text(const std::string& path, const std::string& content);

struct RunOptions {
  int jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides initial.seed
  std::optional<std::string> out_dir;
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
};

/// Executes the experiment and writes its files under the output directory. Module errors
/// become an error.json record and a non-zero exit code (2 config/input, 3 numerical, 4 I/O).
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Sweep rows in the order of config.epsilons; a failing epsilon records its error and the
/// remaining rows are still computed.
SweepReport run_sweep(const ExperimentConfig& config, int jobs);

int exit_code_for(const Error& e);

}  // namespace nlt
