#pragma once

#include <cmath>
#include <sstream>

#include "nlt/trajectory.hpp"

namespace nlt::detail {

constexpr double kMinTimeStep = 1e-14;

/// Shared explicit time loop: advances to every output time exactly and records step statistics.
/// `stable_dt(rho)` returns the CFL step, `advance(rho, dt)` updates in place,
/// `record(t, rho)` appends a snapshot.
template <typename StableDt, typename Advance, typename Record>
StepStatistics march(Field& rho, const SolverConfig& config, StableDt&& stable_dt, Advance&& advance,
                     Record&& record) {
  config.validate();
  const auto times = config.output_times();
  StepStatistics stats;
  stats.rho_min = rho.minCoeff();
  stats.rho_max = rho.maxCoeff();
  stats.dt_min = std::numeric_limits<double>::infinity();
  double dt_sum = 0.0;

  double t = 0.0;
  record(t, rho);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (t < target) {
      const double cfl_dt = stable_dt(rho);
      if (!(cfl_dt >= kMinTimeStep)) {
        std::ostringstream os;
        os << "time step collapsed to " << cfl_dt << " at t = " << t << " (step " << stats.steps << ")";
        throw Error(ErrorCode::stagnation, os.str());
      }
      double dt = cfl_dt;
      bool lands = false;
      if (t + dt >= target || target - (t + dt) < 1e-12 * std::max(1.0, target)) {
        dt = target - t;
        lands = true;
      }
      advance(rho, dt);
      ++stats.steps;
      t = lands ? target : t + dt;
      if (!rho.allFinite()) {
        std::ostringstream os;
        os << "non-finite density after step " << stats.steps << " (t = " << t << ")";
        throw Error(ErrorCode::blowup, os.str());
      }
      stats.rho_min = std::min(stats.rho_min, rho.minCoeff());
      stats.rho_max = std::max(stats.rho_max, rho.maxCoeff());
      if (!lands) stats.dt_min = std::min(stats.dt_min, dt);
      stats.dt_max = std::max(stats.dt_max, dt);
      dt_sum += dt;
    }
    record(t, rho);
  }
  if (!std::isfinite(stats.dt_min)) stats.dt_min = stats.dt_max;
  stats.dt_mean = stats.steps > 0 ? dt_sum / stats.steps : 0.0;
  return stats;
}

}  // namespace nlt::detail
