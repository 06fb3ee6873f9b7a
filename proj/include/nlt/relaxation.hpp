#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlt/trajectory.hpp"

namespace nlt {

/// Relaxation-system view of the nonlocal law in the coordinates tau = t - x / K, y = x.
class RelaxationFrame {
 public:
  /// Rejects K <= v(0).
  RelaxationFrame(double K, KernelScale eps, VelocityModel model);

  double K() const { return K_; }
  const KernelScale& eps() const { return eps_; }
  const VelocityModel& model() const { return model_; }

  /// Admissible band [ln(K - v(0)), ln K] of z = ln(K - v(q)).
  double z_min() const;
  double z_max() const;

 private:
  double K_;
  KernelScale eps_;
  VelocityModel model_;
};

struct CharacteristicSpeeds {
  double lambda1;
  double lambda2;
};

/// Frozen speeds lambda1 = -K, lambda2 = K v(q) / (K - v(q)).
CharacteristicSpeeds speeds(double q, const RelaxationFrame& frame);

/// Equilibrium speed K f'(rho) / (K - f'(rho)), f' = v + rho v'.
double equilibrium_speed(double rho, const RelaxationFrame& frame);

struct SubcharacteristicReport {
  int samples = 0;
  double lower_margin = 0.0;  // min over samples of lambda* - lambda1
  double upper_margin = 0.0;  // min over samples of lambda2 - lambda*
  /// lambda2 - lambda* at rho = 0, where the two speeds meet (f'(0) = v(0)).
  double vacuum_gap = 0.0;
  bool passed = false;
};

/// Samples rho = q at the midpoints of n_samples equal subintervals of [0, rho_jam].
SubcharacteristicReport check_subcharacteristic(const RelaxationFrame& frame, int n_samples);

struct BvConditionReport {
  double rho1 = 0.0, rho2 = 0.0;
  AssumptionCheck local_tv;         // min_[rho1,rho2] |v'| >= (rho2 - rho1)(|v''| + |v'|^2 / (K - |v|))
  AssumptionCheck global_tv;        // min |v'| > rho_jam |v''|
  std::optional<AssumptionCheck> affine_tv;  // rho_jam |v'|^2 / (K - |v|) <= min |v'|
  std::optional<double> minimal_K;  // smallest K satisfying the affine condition
  AssumptionCheck source_u;         // Lambda_u <= 0 on sampled states
  AssumptionCheck source_z;         // Lambda_z >= 0 on sampled states
  bool passed() const;
};

BvConditionReport check_bv_conditions(const RelaxationFrame& frame, double rho1, double rho2,
                                      int n_samples = 101);

/// u = ln rho per cell and z = ln(K - v(q)) for the q values supplied.
struct UZFields {
  Grid grid;
  Field u;
  Field z;
};

/// Uses q at the left edges as stored in the averaged field.
UZFields to_uz(const DensityField& rho, const AveragedField& q, const RelaxationFrame& frame);
/// Same map with explicit q samples (e.g. centre values).
UZFields to_uz(const DensityField& rho, const Field& q, const RelaxationFrame& frame);

DensityField density_of(const UZFields& uz);
/// v^{-1}(K - e^z) per cell.
Field averaged_of(const UZFields& uz, const RelaxationFrame& frame);

struct SourceTerm {
  double Lambda;
  double g_of_u;  // equilibrium z = ln(K - v(e^u))
};

/// Lambda(u, z) = (e^u - q(z)) v'(q(z)) / (K - v(q(z))) with q(z) = v^{-1}(K - e^z).
SourceTerm lambda_source(double u, double z, const RelaxationFrame& frame);

double equilibrium_z(double u, const RelaxationFrame& frame);

struct SourcePartials {
  double d_u;
  double d_z;
};

/// Closed-form partial derivatives of Lambda.
SourcePartials lambda_partials(double u, double z, const RelaxationFrame& frame);

struct TransformedTvSample {
  double time;
  double u_part;    // int |u_x + u_t / K| dx
  double z_part;    // int |z_x + z_t / K| dx
  double weighted;  // int K / (K - v(q)) |u_x + u_t / K| dx
  /// The weighted u part: the fixed-t slice of the flux of |u_y| + |z_y| through t = const, which
  /// is what is non-increasing when Lambda_u <= 0 <= Lambda_z. The plain sum u_part + z_part is
  /// only monotone along lines of constant tau.
  double value() const { return weighted; }
};

/// Per interior snapshot, u = ln rho and z = ln(K - v(q)) at cell centres with u_y = u_x + u_t / K
/// (likewise z_y) from centred differences in x and across the neighbouring snapshots.
std::vector<TransformedTvSample> transformed_tv(const Trajectory& traj, const RelaxationFrame& frame);

struct RelaxationOptions {
  double newton_tolerance = 1e-12;
  int newton_max_iterations = 50;
};

struct UZSnapshot {
  double t;
  UZFields fields;
};

struct RelaxationTrajectory {
  std::vector<UZSnapshot> snapshots;  // at physical times t
  long steps = 0;
  double dtau = 0.0;
  int max_newton_iterations = 0;
  int bisection_fallbacks = 0;
};

/// One IMEX step of the diagonal (u, z) system on a fixed tau level: explicit upwind transport
/// (u with speed K(K e^{-z} - 1) >= 0, z with speed -K), then backward Euler on the source per cell.
class RelaxationStepper {
 public:
  RelaxationStepper(RelaxationFrame frame, RelaxationOptions options = {});

  const RelaxationFrame& frame() const { return frame_; }

  /// cfl dy / max(K, max transport speed).
  double stable_dtau(const UZFields& state, double cfl) const;
  void transport(UZFields& state, double dtau) const;
  /// Returns the largest Newton iteration count used.
  int relax_source(UZFields& state, double dtau);
  void step(UZFields& state, double dtau);

  int bisection_fallbacks() const { return fallbacks_; }

 private:
  RelaxationFrame frame_;
  RelaxationOptions options_;
  int fallbacks_ = 0;
};

/// Solves the relaxation system for the physical Cauchy problem whose t = 0 data is `initial`
/// (u = ln rho0, z = ln(K - v(q0)) at cell centres). The tau-marching starts on the line through
/// the right end of the domain; a cell is held at its t = 0 data until the tau line reaches
/// t = 0 there. Snapshots are reported at the physical times of `config`, interpolated in tau.
RelaxationTrajectory solve_relaxation(const UZFields& initial, const RelaxationFrame& frame,
                                      const SolverConfig& config, RelaxationOptions options = {});

}  // namespace nlt
