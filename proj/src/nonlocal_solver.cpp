#include "nlt/nonlocal_solver.hpp"

#include <cmath>

#include "stepping.hpp"

namespace nlt {

const Snapshot* Trajectory::at(double t) const {
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &s;
  return nullptr;
}

Trajectory solve_nonlocal(const DensityField& initial, const VelocityModel& model, KernelScale eps,
                          const SolverConfig& config) {
  const Grid& grid = initial.grid;
  if (initial.values.minCoeff() < 0.0 || initial.values.maxCoeff() > model.rho_jam())
    throw Error(ErrorCode::domain, "initial density outside [0, rho_jam]");

  const int n = grid.n_cells();
  const double dx = grid.dx();
  const double beta = std::exp(-dx / eps.epsilon());
  const double v0 = model.free_speed();
  const double dv_max = model.max_abs_derivative();

  Trajectory traj{model, eps, {}, {}};
  Field q(n), speed(n + 1), flux(n + 1);

  // speed[i] = v(q at left edge i), i = 0..n; q_n is the ghost edge.
  auto refresh_speed = [&](const Field& rho) {
    q = exponential_recursion(rho, beta, grid.boundary());
    speed.head(n) = model.apply(q);
    speed[n] = grid.periodic() ? speed[0] : model(rho[n - 1]);
  };

  auto stable_dt = [&](const Field& rho) {
    refresh_speed(rho);
    const double wave = std::max(v0, speed.maxCoeff()) + (1.0 - beta) * rho.maxCoeff() * dv_max;
    return config.cfl * dx / wave;
  };

  auto advance = [&](Field& rho, double dt) {
    // stable_dt already refreshed q for this state.
    const double lambda = dt / dx;
    for (int i = 0; i < n; ++i) flux[i + 1] = rho[i] * speed[i + 1];
    flux[0] = grid.periodic() ? flux[n] : rho[0] * speed[0];
    rho -= lambda * (flux.tail(n) - flux.head(n));
  };

  auto record = [&](double t, const Field& rho) {
    DensityField field{grid, rho};
    AveragedField avg{grid, exponential_recursion(rho, beta, grid.boundary()), eps};
    traj.snapshots.push_back({t, std::move(field), std::move(avg)});
  };

  Field rho = initial.values;
  traj.stats = detail::march(rho, config, stable_dt, advance, record);
  return traj;
}

}  // namespace nlt
