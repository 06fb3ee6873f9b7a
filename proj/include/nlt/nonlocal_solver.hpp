#pragma once

#include <vector>

#include "nlt/trajectory.hpp"

namespace nlt {

/// Explicit upwind finite volumes for rho_t + (rho v(q))_x = 0 with the exponential
/// look-ahead average. Interface flux F_{i+1/2} = rho_i v(q_{i+1}), q sampled at left edges
/// and recomputed from scratch every step.
///
/// The step is dt = cfl dx / (max(v(0), max v(q)) + (1 - beta) max(rho) max|v'|). The second
/// term is the sensitivity of the flux to rho_i through q_i; with it the update is monotone in
/// rho_i and the max principle holds for every cfl in (0, 1].
///
/// Throws Error(stagnation) if dt collapses below 1e-14 and Error(blowup) on a non-finite state.
Trajectory solve_nonlocal(const DensityField& initial, const VelocityModel& model, KernelScale eps,
                          const SolverConfig& config);

struct PicardResult {
  DensityField rho;  // rho(t0, .)
  int sweeps = 0;
  int time_levels = 0;
  std::vector<double> increments;  // max-norm distance between successive iterates
  double contraction_factor = 0.0; // largest measured ratio of successive increments
};

/// Short-time oracle built on the characteristics fixed-point map. Starting from the frozen
/// guess rho(t, .) = initial, each sweep traces the characteristics x' = v(q) backwards from
/// every cell centre and time level (Heun in time, linear interpolation in space) and
/// integrates (ln rho)' = -v'(q) q_x along them, with q_x = (q - rho) / eps. Iterates until
/// successive guesses differ by less than `tolerance` in max norm.
///
/// Intended for Lipschitz, uniformly positive data and small t0.
PicardResult picard_oracle(const DensityField& initial, const VelocityModel& model, KernelScale eps,
                           double t0, double tolerance, int max_sweeps = 100);

}  // namespace nlt
