#include <cmath>
#include <sstream>

#include "nlt/relaxation.hpp"

namespace nlt {

RelaxationStepper::RelaxationStepper(RelaxationFrame frame, RelaxationOptions options)
    : frame_(std::move(frame)), options_(options) {}

double RelaxationStepper::stable_dtau(const UZFields& state, double cfl) const {
  const double K = frame_.K();
  const double fastest = K * (K * (-state.z).exp() - 1.0).maxCoeff();
  return cfl * state.grid.dx() / std::max(K, fastest);
}

void RelaxationStepper::transport(UZFields& s, double dtau) const {
  const int n = s.grid.n_cells();
  const double K = frame_.K();
  const double c = dtau / s.grid.dx();
  const Field u_old = s.u;
  const Field z_old = s.z;
  // Ghosts: inflow for u from the left, for z from the right.
  const double u_left = s.grid.periodic() ? u_old[n - 1] : u_old[0];
  const double z_right = s.grid.periodic() ? z_old[0] : equilibrium_z(u_old[n - 1], frame_);
  for (int i = 0; i < n; ++i) {
    const double speed = K * (K * std::exp(-z_old[i]) - 1.0);
    const double upwind_u = i > 0 ? u_old[i - 1] : u_left;
    const double upwind_z = i + 1 < n ? z_old[i + 1] : z_right;
    s.u[i] = u_old[i] - c * speed * (u_old[i] - upwind_u);
    s.z[i] = z_old[i] + c * K * (upwind_z - z_old[i]);
  }
}

int RelaxationStepper::relax_source(UZFields& s, double dtau) {
  const double K = frame_.K();
  const double stiffness = K * dtau / frame_.eps().epsilon();
  const double ln_rho_jam = std::log(frame_.model().rho_jam());
  int worst = 0;
  for (Eigen::Index i = 0; i < s.u.size(); ++i) {
    // Backward Euler: u - u* = c Lambda(u, z), z - z* = -c Lambda(u, z); u + z is conserved.
    const double u_star = s.u[i];
    const double sum = u_star + s.z[i];
    auto residual = [&](double u) { return u - u_star - stiffness * lambda_source(u, sum - u, frame_).Lambda; };

    const double lo = sum - frame_.z_max();
    const double hi = std::min(sum - frame_.z_min(), ln_rho_jam);
    double u = std::clamp(u_star, lo, hi);
    bool converged = false;
    int it = 0;
    for (; it < options_.newton_max_iterations; ++it) {
      const double r = residual(u);
      if (std::abs(r) <= options_.newton_tolerance) {
        converged = true;
        break;
      }
      const auto d = lambda_partials(u, sum - u, frame_);
      const double slope = 1.0 - stiffness * (d.d_u - d.d_z);
      double next = u - r / slope;
      if (!std::isfinite(next) || next < lo || next > hi) break;
      u = next;
    }
    if (!converged) {
      // Bisection on the conserved-sum reduction.
      ++fallbacks_;
      double a = lo, b = hi;
      double ra = residual(a), rb = residual(b);
      if (ra * rb > 0.0) {
        std::ostringstream os;
        os << "stiff source solve failed in cell " << i << ": residual " << residual(u)
           << " and no sign change on the admissible band";
        throw Error(ErrorCode::stiff_source, os.str());
      }
      for (it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double rm = residual(m);
        if ((rm < 0.0) == (ra < 0.0)) {
          a = m;
          ra = rm;
        } else {
          b = m;
        }
      }
      u = 0.5 * (a + b);
    }
    worst = std::max(worst, it);
    s.u[i] = u;
    s.z[i] = sum - u;
  }
  return worst;
}

void RelaxationStepper::step(UZFields& state, double dtau) {
  transport(state, dtau);
  relax_source(state, dtau);
}

RelaxationTrajectory solve_relaxation(const UZFields& initial, const RelaxationFrame& frame,
                                      const SolverConfig& config, RelaxationOptions options) {
  config.validate();
  const Grid& grid = initial.grid;
  const int n = grid.n_cells();
  if (initial.u.size() != n || initial.z.size() != n)
    throw Error(ErrorCode::shape, "solve_relaxation: u, z lengths do not match the grid");
  for (int i = 0; i < n; ++i) lambda_source(initial.u[i], initial.z[i], frame);  // band check

  const double K = frame.K();
  const auto times = config.output_times();
  const double t_end = times.back();
  Field y = grid.centers();

  RelaxationStepper stepper(frame, options);
  RelaxationTrajectory out;
  out.snapshots.reserve(times.size());
  for (double t : times) out.snapshots.push_back({t, initial});

  // Physical time of every cell on the current tau line.
  double tau = -y[n - 1] / K;
  const double tau_end = t_end - y[0] / K;
  UZFields state = initial;
  while (tau < tau_end) {
    double dtau = stepper.stable_dtau(state, config.cfl);
    if (!(dtau >= 1e-14)) throw Error(ErrorCode::stagnation, "solve_relaxation: tau step collapsed");
    if (tau + dtau > tau_end) dtau = tau_end - tau;
    UZFields next = state;
    stepper.transport(next, dtau);
    out.max_newton_iterations = std::max(out.max_newton_iterations, stepper.relax_source(next, dtau));
    const double tau_next = tau + dtau;
    for (int i = 0; i < n; ++i) {
      const double t_now = tau + y[i] / K;
      const double t_next = tau_next + y[i] / K;
      if (t_next <= 0.0) {
        next.u[i] = initial.u[i];
        next.z[i] = initial.z[i];
        continue;
      }
      for (std::size_t k = 1; k < times.size(); ++k) {
        const double target = times[k];
        if (t_now < target && target <= t_next + 1e-12) {
          const double w = (target - t_now) / dtau;
          out.snapshots[k].fields.u[i] = (1.0 - w) * state.u[i] + w * next.u[i];
          out.snapshots[k].fields.z[i] = (1.0 - w) * state.z[i] + w * next.z[i];
        }
      }
    }
    if (!next.u.allFinite() || !next.z.allFinite())
      throw Error(ErrorCode::blowup, "solve_relaxation: non-finite state after step " + std::to_string(out.steps + 1));
    state = std::move(next);
    tau = tau_next;
    ++out.steps;
    out.dtau = std::max(out.dtau, dtau);
  }
  out.bisection_fallbacks = stepper.bisection_fallbacks();
  return out;
}

}  // namespace nlt
