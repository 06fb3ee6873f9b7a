#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nlt/experiments.hpp"
#include "nlt/nonlocal_solver.hpp"
#include "nlt/relaxation.hpp"

namespace nlt {

using nlohmann::json;

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::io) return 4;
  if (e.is_numerical()) return 3;
  return 2;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

ReportMetadata metadata(const ExperimentConfig& c, const std::optional<DensityField>& initial) {
  ReportMetadata m;
  m.config_hash = hex(c.hash());
  m.kind = std::string(to_string(c.kind));
  m.x_min = c.x_min;
  m.x_max = c.x_max;
  m.n_cells = c.n_cells;
  m.boundary = c.boundary == Boundary::periodic ? "periodic" : "constant_extension";
  m.t_final = c.solver.t_final;
  m.exploratory = c.model.kind != "affine";
  if (initial && c.boundary == Boundary::constant_extension)
    m.boundary_clearance = boundary_clearance(*initial, c.model.build(), c.solver.t_final);
  return m;
}

std::string describe(const Error& e) { return std::string(to_string(e.code())) + ": " + e.what(); }

SweepRow sweep_row(const DensityField& initial, const VelocityModel& model, double eps, const SolverConfig& solver,
                   const Trajectory& reference, const std::vector<TestFunction>& phis) {
  const auto t0 = Clock::now();
  SweepRow row;
  row.epsilon = eps;
  const Trajectory tr = solve_nonlocal(initial, model, KernelScale(eps), solver);
  const auto& last = tr.final().rho;
  row.l1_to_reference = l1_distance(last, reference.final().rho);
  row.tv_final = total_variation(last);
  const double lo = initial.values.minCoeff(), hi = initial.values.maxCoeff();
  if (lo > 0.0) row.tv_bound = hi / lo * total_variation(initial);
  row.maxp_margin = std::min(tr.stats.rho_min - lo, hi - tr.stats.rho_max);
  row.kdev_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.snapshots) {
    const auto k = kernel_deviation(s.rho, *s.q);
    row.kdev_margin = std::min(row.kdev_margin, k.bound - k.deviation);
  }
  if (!phis.empty()) {
    row.entropy_residuals = entropy_residual(tr, FluxEntropyModel(model), phis);
    for (double r : row.entropy_residuals) row.entropy_pos_part += std::max(r, 0.0);
  }
  row.runtime_seconds = seconds_since(t0);
  return row;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "t,x,rho,q_left_edge\n";
  for (const auto& s : tr.snapshots) {
    const Grid& g = s.rho.grid;
    for (int i = 0; i < g.n_cells(); ++i) {
      os << s.t << ',' << g.center(i) << ',' << s.rho.values[i] << ',';
      if (s.q) os << s.q->values[i];
      os << '\n';
    }
  }
  return os.str();
}

json check_json(const AssumptionCheck& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}};
}

std::vector<std::string> run_single(const ExperimentConfig& c, const DensityField& initial, const std::string& dir) {
  const VelocityModel model = c.model.build();
  const auto t0 = Clock::now();
  const Trajectory tr = solve_nonlocal(initial, model, KernelScale(c.epsilons.front()), c.solver);
  const double runtime = seconds_since(t0);

  DiagnosticsReport rep;
  rep.add("steps", static_cast<double>(tr.stats.steps), "time steps taken");
  rep.add("dt_min", tr.stats.dt_min, "smallest step");
  rep.add("dt_max", tr.stats.dt_max, "largest step");
  rep.add("mass_initial", tr.initial().rho.mass(), "sum rho dx at t = 0");
  rep.add("mass_final", tr.final().rho.mass(), "sum rho dx at t_final");
  rep.add("maxp_margin",
          std::min(tr.stats.rho_min - initial.values.minCoeff(), initial.values.maxCoeff() - tr.stats.rho_max),
          "max principle over every step, >= 0 when satisfied");
  rep.add("tv_initial", total_variation(initial), "total variation at t = 0");
  rep.add("tv_final", total_variation(tr.final().rho), "total variation at t_final");
  if (initial.values.minCoeff() > 0.0)
    rep.add("tv_bound", initial.values.maxCoeff() / initial.values.minCoeff() * total_variation(initial),
            "(rho_max / rho_min) TV(initial)");
  double kdev = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.snapshots) {
    const auto k = kernel_deviation(s.rho, *s.q);
    kdev = std::min(kdev, k.bound - k.deviation);
  }
  rep.add("kdev_margin", kdev, "min over snapshots of eps TV(rho) - ||q - rho||_L1");
  if (c.boundary == Boundary::constant_extension)
    rep.add("boundary_clearance", boundary_clearance(initial, model, c.solver.t_final),
            "distance from boundaries to the data minus v(0) t_final; negative means boundary contact");
  rep.add("runtime_seconds", runtime, "wall clock");

  const std::string csv = dir + "/trajectory.csv", js = dir + "/summary.json";
  write_text(csv, trajectory_csv(tr));
  write_text(js, emit_report(rep, ReportFormat::json));
  return {csv, js};
}

std::vector<std::string> run_compare(const ExperimentConfig& c, const DensityField& initial, const std::string& dir) {
  const VelocityModel model = c.model.build();
  const KernelScale eps(c.epsilons.front());
  const Trajectory nl = solve_nonlocal(initial, model, eps, c.solver);
  const Trajectory loc = solve_local(initial, FluxEntropyModel(model), c.solver);

  DiagnosticsReport rep;
  rep.add("l1_nonlocal_local", l1_distance(nl.final().rho, loc.final().rho), "L1 distance at t_final");
  if (c.model.kind != "affine")
    rep.add("exploratory", 1.0, "non-affine speed law: distances are measurements, no convergence is asserted");
  std::optional<DensityField> relaxed;
  if (c.relaxation) {
    const RelaxationFrame frame(*c.K, eps, model);
    const auto q0 = average(initial, eps);
    const auto uz = to_uz(initial, center_values(initial, q0), frame);
    const auto rt = solve_relaxation(uz, frame, c.solver);
    relaxed = density_of(rt.snapshots.back().fields);
    rep.add("l1_relaxation_nonlocal", l1_distance(*relaxed, nl.final().rho), "L1 distance at t_final");
    rep.add("l1_relaxation_local", l1_distance(*relaxed, loc.final().rho), "L1 distance at t_final");
    rep.add("relaxation_steps", static_cast<double>(rt.steps), "tau steps");
    rep.add("relaxation_newton_max", rt.max_newton_iterations, "largest Newton iteration count");
    rep.add("relaxation_bisection_fallbacks", rt.bisection_fallbacks, "cells solved by bisection");
  }

  std::ostringstream os;
  os.precision(17);
  os << "x,nonlocal,local" << (relaxed ? ",relaxation" : "") << '\n';
  const Grid& g = initial.grid;
  for (int i = 0; i < g.n_cells(); ++i) {
    os << g.center(i) << ',' << nl.final().rho.values[i] << ',' << loc.final().rho.values[i];
    if (relaxed) os << ',' << relaxed->values[i];
    os << '\n';
  }
  const std::string csv = dir + "/compare.csv", js = dir + "/compare.json";
  write_text(csv, os.str());
  write_text(js, emit_report(rep, ReportFormat::json));
  return {csv, js};
}

std::vector<std::string> run_check(const ExperimentConfig& c, const std::optional<DensityField>& initial,
                                   const std::string& dir) {
  const VelocityModel model = c.model.build();
  const double eps = c.epsilons.empty() ? 1.0 : c.epsilons.front();
  const RelaxationFrame frame(*c.K, KernelScale(eps), model);

  const ModelReport mr = validate_model(model, c.check_samples);
  json model_checks = json::array();
  for (const auto& ch : mr.checks) model_checks.push_back(check_json(ch));

  const auto sc = check_subcharacteristic(frame, c.check_samples);

  double rho1 = 0.0, rho2 = model.rho_jam();
  if (initial && initial->values.maxCoeff() > initial->values.minCoeff()) {
    rho1 = initial->values.minCoeff();
    rho2 = initial->values.maxCoeff();
  }
  if (c.check_rho1) rho1 = *c.check_rho1;
  if (c.check_rho2) rho2 = *c.check_rho2;
  const auto bv = check_bv_conditions(frame, rho1, rho2);
  json bv_json = {{"rho1", bv.rho1},
                  {"rho2", bv.rho2},
                  {"local_tv", check_json(bv.local_tv)},
                  {"global_tv", check_json(bv.global_tv)},
                  {"source_u", check_json(bv.source_u)},
                  {"source_z", check_json(bv.source_z)},
                  {"passed", bv.passed()}};
  if (bv.affine_tv) bv_json["affine_tv"] = check_json(*bv.affine_tv);
  if (bv.minimal_K) bv_json["minimal_K"] = *bv.minimal_K;

  const json out = {
      {"version", kVersion},
      {"config_hash", hex(c.hash())},
      {"K", frame.K()},
      {"model",
       {{"passed", mr.all_passed()},
        {"v_jam_residual", mr.v_jam_residual},
        {"max_derivative", mr.max_derivative},
        {"delta_star", mr.delta_star},
        {"second_derivative_sup", mr.second_derivative_sup},
        {"inverse_max_error", mr.inverse_max_error},
        {"checks", model_checks}}},
      {"subcharacteristic",
       {{"passed", sc.passed},
        {"samples", sc.samples},
        {"lower_margin", sc.lower_margin},
        {"upper_margin", sc.upper_margin},
        {"vacuum_gap", sc.vacuum_gap}}},
      {"bv_conditions", bv_json},
      {"all_passed", mr.all_passed() && sc.passed && bv.passed()}};
  const std::string js = dir + "/check.json";
  write_text(js, out.dump(2) + "\n");
  return {js};
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& c, int jobs) {
  const DensityField initial = c.initial_field();
  const VelocityModel model = c.model.build();
  SweepReport report;
  report.meta = metadata(c, initial);
  report.rows.resize(c.epsilons.size());

  const Trajectory reference = solve_local(initial, FluxEntropyModel(model), c.solver);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < c.epsilons.size(); k = next++) {
      try {
        report.rows[k] = sweep_row(initial, model, c.epsilons[k], c.solver, reference, c.test_functions);
      } catch (const Error& e) {
        report.rows[k].epsilon = c.epsilons[k];
        report.rows[k].error = describe(e);
      } catch (const std::exception& e) {
        report.rows[k].epsilon = c.epsilons[k];
        report.rows[k].error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(c.epsilons.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> eps, l1, ent;
  for (const auto& r : report.rows) {
    if (r.error) continue;
    eps.push_back(r.epsilon);
    l1.push_back(r.l1_to_reference);
    ent.push_back(r.entropy_pos_part);
  }
  if (eps.size() >= 2) {
    report.l1_slope = fitted_slope(eps, l1);
    if (!c.test_functions.empty()) report.entropy_slope = fitted_slope(eps, ent);
  }
  return report;
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig c = config;
  if (options.seed) {
    c.initial.seed = *options.seed;
    c.canonical += "#seed=" + std::to_string(*options.seed);
  }
  const std::string dir = options.out_dir.value_or(c.output_dir);
  RunOutcome outcome;
  try {
    std::optional<DensityField> initial;
    if (c.n_cells > 0) initial = c.initial_field();
    switch (c.kind) {
      case ExperimentKind::run:
        outcome.files = run_single(c, *initial, dir);
        break;
      case ExperimentKind::compare:
        outcome.files = run_compare(c, *initial, dir);
        break;
      case ExperimentKind::check:
        outcome.files = run_check(c, initial, dir);
        break;
      case ExperimentKind::sweep: {
        const SweepReport rep = run_sweep(c, options.jobs);
        const std::string csv = dir + "/sweep.csv", js = dir + "/sweep.json";
        write_text(csv, emit_report(rep, ReportFormat::csv));
        write_text(js, emit_report(rep, ReportFormat::json));
        outcome.files = {csv, js};
        for (const auto& r : rep.rows)
          if (r.error) outcome.exit_code = 3;
        break;
      }
    }
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e);
    const json record = {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}},
                         {"exit_code", outcome.exit_code}};
    const std::string path = dir + "/error.json";
    try {
      write_text(path, record.dump(2) + "\n");
      outcome.files.push_back(path);
    } catch (const Error&) {
      outcome.exit_code = 4;
    }
  }
  return outcome;
}

}  // namespace nlt
