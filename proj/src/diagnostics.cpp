#include "nlt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace nlt {

double l1_distance(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::shape, "l1_distance: fields live on different grids");
  return (a.values - b.values).abs().sum() * a.grid.dx();
}

KernelDeviation kernel_deviation(const DensityField& rho, const AveragedField& q) {
  if (!(rho.grid == q.grid)) throw Error(ErrorCode::shape, "kernel_deviation: grids differ");
  const int n = rho.grid.n_cells();
  const double eps = q.eps.epsilon();
  // Inside cell i the profile is rho_i + (q_{i+1} - rho_i) exp((x - x_{i+1/2}) / eps).
  const double cell_mass = -eps * std::expm1(-rho.grid.dx() / eps);
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double right = i + 1 < n ? q.values[i + 1] : trailing_edge_value(rho, q);
    dev += std::abs(right - rho.values[i]);
  }
  return {dev * cell_mass, eps * total_variation(rho)};
}

namespace {

// (1 - r^2)^3 and its first two derivatives in r, zero outside |r| < 1.
struct Poly6 {
  static double f(double r) {
    const double s = 1.0 - r * r;
    return s > 0.0 ? s * s * s : 0.0;
  }
  static double d1(double r) {
    const double s = 1.0 - r * r;
    return s > 0.0 ? -6.0 * r * s * s : 0.0;
  }
  static double d2(double r) {
    const double s = 1.0 - r * r;
    return s > 0.0 ? -6.0 * s * s + 24.0 * r * r * s : 0.0;
  }
};

}  // namespace

double TestFunction::operator()(double t, double x) const {
  return Poly6::f((x - center_x) / radius_x) * Poly6::f((t - center_t) / radius_t);
}
double TestFunction::dx(double t, double x) const {
  return Poly6::d1((x - center_x) / radius_x) / radius_x * Poly6::f((t - center_t) / radius_t);
}
double TestFunction::dt(double t, double x) const {
  return Poly6::f((x - center_x) / radius_x) * Poly6::d1((t - center_t) / radius_t) / radius_t;
}
double TestFunction::dxx(double t, double x) const {
  return Poly6::d2((x - center_x) / radius_x) / (radius_x * radius_x) * Poly6::f((t - center_t) / radius_t);
}

std::vector<double> entropy_residual(const Trajectory& traj, const FluxEntropyModel& fe,
                                     const std::vector<TestFunction>& phis) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 2) throw Error(ErrorCode::insufficient_data, "entropy_residual needs at least 2 snapshots");
  const Grid& grid = snaps.front().rho.grid;
  const int n = grid.n_cells();
  const double dx = grid.dx();

  for (const auto& phi : phis) {
    if (!(phi.radius_x > 0.0 && phi.radius_t > 0.0))
      throw Error(ErrorCode::domain, "test function radii must be positive");
    if (phi.center_t - phi.radius_t < snaps.front().t || phi.center_t + phi.radius_t > snaps.back().t ||
        phi.center_x - phi.radius_x < grid.x_min() || phi.center_x + phi.radius_x > grid.x_max())
      throw Error(ErrorCode::support, "test function support exceeds the trajectory window");
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
      const bool overlaps = snaps[k + 1].t > phi.center_t - phi.radius_t && snaps[k].t < phi.center_t + phi.radius_t;
      if (overlaps && snaps[k + 1].t - snaps[k].t > phi.radius_t / 16.0 * (1.0 + 1e-9))
        throw Error(ErrorCode::insufficient_data, "snapshot spacing exceeds radius_t / 16 inside a test function support");
    }
  }

  std::vector<EntropyFields> fields;
  fields.reserve(snaps.size());
  for (const auto& s : snaps) fields.push_back(entropy_pair(s.rho, fe));

  const Field x = grid.centers();
  std::vector<double> out;
  for (const auto& phi : phis) {
    const int i_lo = std::max(0, static_cast<int>(std::floor((phi.center_x - phi.radius_x - grid.x_min()) / dx)) - 1);
    const int i_hi = std::min(n - 1, static_cast<int>(std::ceil((phi.center_x + phi.radius_x - grid.x_min()) / dx)) + 1);
    double r = 0.0;
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
      const double t0 = snaps[k].t, t1 = snaps[k + 1].t;
      if (t1 <= phi.center_t - phi.radius_t || t0 >= phi.center_t + phi.radius_t) continue;
      const double tm = 0.5 * (t0 + t1);
      double slab = 0.0;
      for (int i = i_lo; i <= i_hi; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double eta = 0.5 * (fields[k].eta[i] + fields[k + 1].eta[i]);
        const double psi = 0.5 * (fields[k].psi[i] + fields[k + 1].psi[i]);
        slab += w * (eta * phi.dt(tm, x[i]) + psi * phi.dx(tm, x[i]));
      }
      r -= slab * dx * (t1 - t0);
    }
    out.push_back(r);
  }
  return out;
}

namespace {

std::vector<double> rearrange(const std::vector<double>& g, bool right_first) {
  for (double v : g)
    if (!(v >= 0.0)) throw Error(ErrorCode::domain, "symmetric rearrangement needs non-negative entries");
  const long n = static_cast<long>(g.size());
  std::vector<double> sorted = g;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> out(g.size());
  const long c = (n - 1) / 2;
  long placed = 0;
  for (long d = 0; placed < n; ++d) {
    const long first = right_first ? c + d : c - d;
    const long second = right_first ? c - d : c + d;
    if (first >= 0 && first < n) out[first] = sorted[placed++];
    if (d > 0 && placed < n && second >= 0 && second < n) out[second] = sorted[placed++];
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

std::vector<double> symmetric_rearrangement(const std::vector<double>& g) { return rearrange(g, true); }
std::vector<double> symmetric_rearrangement_left_first(const std::vector<double>& g) { return rearrange(g, false); }

double hardy_littlewood_gap(const std::vector<double>& g1, const std::vector<double>& g2) {
  if (g1.size() != g2.size()) throw Error(ErrorCode::shape, "hardy_littlewood_gap: lengths differ");
  return dot(symmetric_rearrangement(g1), symmetric_rearrangement(g2)) - dot(g1, g2);
}

ShiftedProduct shifted_product_check(const std::vector<double>& h, long shift) {
  const long n = static_cast<long>(h.size());
  ShiftedProduct r{0.0, 0.0};
  if (n == 0) return r;
  for (long i = 0; i < n; ++i) {
    const long j = ((i + shift) % n + n) % n;
    r.lhs += h[i] * h[i] * h[j];
    r.rhs += h[i] * h[i] * h[i];
  }
  return r;
}

StabilityGap stability_gap(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.size() != b.snapshots.size())
    throw Error(ErrorCode::shape, "stability_gap: trajectories have different snapshot counts");
  const double base = l1_distance(a.initial().rho, b.initial().rho);
  if (!(base > 0.0)) throw Error(ErrorCode::degenerate, "stability_gap: initial data coincide");
  StabilityGap g{0.0, {}};
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12)
      throw Error(ErrorCode::shape, "stability_gap: snapshot times differ");
    const double r = l1_distance(a.snapshots[k].rho, b.snapshots[k].rho) / base;
    g.ratios.push_back(r);
    g.sup_ratio = std::max(g.sup_ratio, r);
  }
  return g;
}

}  // namespace nlt
