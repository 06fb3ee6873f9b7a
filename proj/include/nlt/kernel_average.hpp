#pragma once

#include <variant>

#include "nlt/core_types.hpp"

namespace nlt {

/// Look-ahead average q = w_eps * rho, sampled at the LEFT edge of every cell:
/// values[i] = int_0^inf eps^-1 exp(-s / eps) rho(x_{i-1/2} + s) ds.
struct AveragedField {
  Grid grid;
  Field values;
  KernelScale eps;
};

struct ExactRecursion {};
struct Quadrature {
  double tolerance = 1e-11;
};
using AverageMethod = std::variant<ExactRecursion, Quadrature>;

/// Right-to-left recursion q_i = (1 - beta) rho_i + beta q_{i+1}, beta = exp(-dx / eps).
/// Exact for the piecewise-constant reconstruction of rho.
template <typename Derived>
Field exponential_recursion(const Eigen::ArrayBase<Derived>& rho, double beta, Boundary boundary) {
  const Eigen::Index n = rho.size();
  Field q(n);
  double next;
  if (boundary == Boundary::periodic) {
    // Geometric closure over all periods to the right.
    double acc = 0.0, w = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      acc += w * rho[k];
      w *= beta;
    }
    next = (1.0 - beta) * acc / (1.0 - w);
  } else {
    next = rho[n - 1];
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    next = (1.0 - beta) * rho[i] + beta * next;
    q[i] = next;
  }
  return q;
}

AveragedField average(const DensityField& rho, KernelScale eps, const AverageMethod& method = ExactRecursion{});

/// Value of q at the right edge of the last cell (the ghost edge q_N).
double trailing_edge_value(const DensityField& rho, const AveragedField& q);

/// q evaluated at cell centres, from the edge values and the exact exponential profile inside each cell.
Field center_values(const DensityField& rho, const AveragedField& q);

/// Max-norm residual of q_x = (q - rho) / eps. D_x is the forward difference between
/// adjacent left edges taken with the exponentially fitted spacing eps (exp(dx / eps) - 1),
/// for which the exact recursion has zero residual.
double ode_residual(const DensityField& rho, const AveragedField& q);

}  // namespace nlt
