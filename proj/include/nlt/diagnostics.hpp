#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlt/local_reference.hpp"
#include "nlt/trajectory.hpp"

namespace nlt {

/// Sum of |v[i+1] - v[i]|; the wrap pair is included when `periodic`.
template <typename Derived>
double total_variation(const Eigen::ArrayBase<Derived>& v, bool periodic) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  double tv = (v.tail(n - 1) - v.head(n - 1)).abs().sum();
  if (periodic) tv += std::abs(v[0] - v[n - 1]);
  return tv;
}

inline double total_variation(const DensityField& f) { return total_variation(f.values, f.grid.periodic()); }

double l1_distance(const DensityField& a, const DensityField& b);

struct KernelDeviation {
  double deviation;  // ||q - rho||_L1 of the exact exponential profile
  double bound;      // eps * TV(rho)
};

KernelDeviation kernel_deviation(const DensityField& rho, const AveragedField& q);

/// phi(t, x) = (1 - xi^2)^3 (1 - theta^2)^3 on |xi|, |theta| < 1, with
/// xi = (x - center_x) / radius_x and theta = (t - center_t) / radius_t. C^2, non-negative.
struct TestFunction {
  double center_x, center_t, radius_x, radius_t;

  double operator()(double t, double x) const;
  double dx(double t, double x) const;
  double dt(double t, double x) const;
  double dxx(double t, double x) const;
};

/// R(phi) = -sum_{n,i} [eta phi_t + psi phi_x](t_{n+1/2}, x_i) dx dt, fields averaged between
/// adjacent snapshots. Requires each phi's support inside the trajectory window and snapshot
/// spacing no larger than radius_t / 16 over it.
std::vector<double> entropy_residual(const Trajectory& traj, const FluxEntropyModel& fe,
                                     const std::vector<TestFunction>& phis);

/// Centre-peaked arrangement of the values sorted in decreasing order. Slots are filled by
/// distance from index (n - 1) / 2; at equal distance the right slot comes first.
std::vector<double> symmetric_rearrangement(const std::vector<double>& g);
/// Same rule with the left slot first; used to show the inequality ignores the tie-break.
std::vector<double> symmetric_rearrangement_left_first(const std::vector<double>& g);

/// sum g1* g2* - sum g1 g2 (non-negative by the Hardy-Littlewood inequality).
double hardy_littlewood_gap(const std::vector<double>& g1, const std::vector<double>& g2);

struct ShiftedProduct {
  double lhs;  // sum h(i)^2 h(i + shift)
  double rhs;  // sum h(i)^3
};

ShiftedProduct shifted_product_check(const std::vector<double>& h, long shift);

struct StabilityGap {
  double sup_ratio;
  std::vector<double> ratios;  // one per common snapshot
};

/// ||rho1(t) - rho2(t)||_L1 / ||rho1(0) - rho2(0)||_L1 over matching snapshots.
StabilityGap stability_gap(const Trajectory& a, const Trajectory& b);

/// Named scalar metrics with the property each one measures.
struct DiagnosticsReport {
  struct Metric {
    double value;
    std::string provenance;
  };
  std::map<std::string, Metric> metrics;

  void add(const std::string& name, double value, std::string provenance) {
    metrics[name] = {value, std::move(provenance)};
  }
};

}  // namespace nlt
