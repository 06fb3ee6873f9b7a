#pragma once

#include "nlt/trajectory.hpp"

namespace nlt {

/// Flux f = rho v(rho) of the local limit, with the quadratic entropy eta = rho^2 / 2 and
/// its flux psi (psi' = eta' f', psi(0) = 0).
class FluxEntropyModel {
 public:
  explicit FluxEntropyModel(VelocityModel model);

  const VelocityModel& model() const { return model_; }
  double flux(double rho) const { return rho * model_(rho); }
  double flux_derivative(double rho) const { return model_(rho) + rho * model_.derivative(rho); }
  double entropy(double rho) const { return 0.5 * rho * rho; }
  /// Closed form a rho^2 / 2 - 2 b rho^3 / 3 for affine v; 16-point Gauss-Legendre otherwise.
  double entropy_flux(double rho) const;
  /// Sup of |f'| over [0, rho_jam].
  double max_wave_speed() const { return max_speed_; }

 private:
  VelocityModel model_;
  double max_speed_ = 0.0;
};

/// Godunov flux: min of f over [l, r] when l <= r, max over [r, l] otherwise.
double godunov_flux(double rho_left, double rho_right, const FluxEntropyModel& fe);

/// Conservative Godunov scheme for rho_t + f(rho)_x = 0. Snapshots carry no averaged field.
Trajectory solve_local(const DensityField& initial, const FluxEntropyModel& fe, const SolverConfig& config);

struct EntropyFields {
  Field eta;
  Field psi;
};

EntropyFields entropy_pair(const DensityField& rho, const FluxEntropyModel& fe);

}  // namespace nlt
