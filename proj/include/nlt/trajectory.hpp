#pragma once

#include <optional>
#include <vector>

#include "nlt/kernel_average.hpp"

namespace nlt {

struct Snapshot {
  double t;
  DensityField rho;
  std::optional<AveragedField> q;  // absent for the local solver
};

/// Per-run step bookkeeping. rho_min/rho_max cover every cell of every step, not only snapshots.
struct StepStatistics {
  long steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  double dt_mean = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
};

struct Trajectory {
  VelocityModel model;
  std::optional<KernelScale> eps;
  std::vector<Snapshot> snapshots;
  StepStatistics stats;

  const Snapshot& initial() const { return snapshots.front(); }
  const Snapshot& final() const { return snapshots.back(); }
  /// Snapshot at time t (exact match within 1e-12), or nullptr.
  const Snapshot* at(double t) const;
};

}  // namespace nlt
