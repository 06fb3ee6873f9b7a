#include "nlt/local_reference.hpp"

#include <array>
#include <cmath>

#include "stepping.hpp"

namespace nlt {

namespace {

constexpr std::array<double, 8> kNodes16{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                         0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                         0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kWeights16{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                           0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                           0.0622535239386479, 0.0271524594117541};

constexpr double kGolden = 0.6180339887498949;

// Golden-section search for the maximiser of sign * f on [lo, hi].
double golden_extremum(double lo, double hi, double sign, const FluxEntropyModel& fe) {
  auto g = [&](double r) { return sign * fe.flux(r); };
  double a = lo, b = hi;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > 1e-12) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kGolden * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kGolden * (b - a);
      gd = g(d);
    }
  }
  return std::max({g(lo), g(hi), g(0.5 * (a + b))}) * sign;
}

}  // namespace

FluxEntropyModel::FluxEntropyModel(VelocityModel model) : model_(std::move(model)) {
  if (model_.is_affine()) {
    max_speed_ = std::max(std::abs(model_.a()), std::abs(model_.a() - 2.0 * model_.b() * model_.rho_jam()));
  } else {
    constexpr int samples = 2001;
    for (int k = 0; k < samples; ++k)
      max_speed_ = std::max(max_speed_, std::abs(flux_derivative(model_.rho_jam() * k / (samples - 1))));
  }
}

double FluxEntropyModel::entropy_flux(double rho) const {
  if (model_.is_affine()) {
    const double r2 = rho * rho;
    return 0.5 * model_.a() * r2 - 2.0 * model_.b() * r2 * rho / 3.0;
  }
  const double half = 0.5 * rho;
  double sum = 0.0;
  for (std::size_t k = 0; k < kNodes16.size(); ++k) {
    for (double sgn : {-1.0, 1.0}) {
      const double r = half + sgn * half * kNodes16[k];
      sum += kWeights16[k] * r * flux_derivative(r);
    }
  }
  return half * sum;
}

double godunov_flux(double l, double r, const FluxEntropyModel& fe) {
  const double rj = fe.model().rho_jam();
  if (l < 0.0 || r < 0.0 || l > rj || r > rj)
    throw Error(ErrorCode::domain, "godunov flux arguments outside [0, rho_jam]");
  if (l == r) return fe.flux(l);
  const double lo = std::min(l, r), hi = std::max(l, r);
  if (fe.model().is_affine()) {
    // f is concave with its peak at a / 2b.
    const double peak = 0.5 * fe.model().a() / fe.model().b();
    if (l <= r) return std::min(fe.flux(l), fe.flux(r));
    return (peak > lo && peak < hi) ? fe.flux(peak) : std::max(fe.flux(l), fe.flux(r));
  }
  return l <= r ? golden_extremum(lo, hi, -1.0, fe) : golden_extremum(lo, hi, 1.0, fe);
}

Trajectory solve_local(const DensityField& initial, const FluxEntropyModel& fe, const SolverConfig& config) {
  const Grid& grid = initial.grid;
  const double rj = fe.model().rho_jam();
  if (initial.values.minCoeff() < 0.0 || initial.values.maxCoeff() > rj)
    throw Error(ErrorCode::domain, "initial density outside [0, rho_jam]");
  const int n = grid.n_cells();
  const double dx = grid.dx();

  Trajectory traj{fe.model(), std::nullopt, {}, {}};
  Field flux(n + 1);

  auto stable_dt = [&](const Field&) { return config.cfl * dx / fe.max_wave_speed(); };
  auto advance = [&](Field& rho, double dt) {
    for (int i = 1; i < n; ++i) flux[i] = godunov_flux(rho[i - 1], rho[i], fe);
    if (grid.periodic()) {
      flux[0] = flux[n] = godunov_flux(rho[n - 1], rho[0], fe);
    } else {
      flux[0] = fe.flux(rho[0]);
      flux[n] = fe.flux(rho[n - 1]);
    }
    rho -= (dt / dx) * (flux.tail(n) - flux.head(n));
    // Round-off can leave the state a few ulps outside [0, rho_jam].
    rho = rho.max(0.0).min(rj);
  };
  auto record = [&](double t, const Field& rho) {
    traj.snapshots.push_back({t, DensityField{grid, rho}, std::nullopt});
  };

  Field rho = initial.values;
  traj.stats = detail::march(rho, config, stable_dt, advance, record);
  return traj;
}

EntropyFields entropy_pair(const DensityField& rho, const FluxEntropyModel& fe) {
  const double rj = fe.model().rho_jam();
  if (rho.values.minCoeff() < 0.0 || rho.values.maxCoeff() > rj)
    throw Error(ErrorCode::domain, "entropy pair needs densities in [0, rho_jam]");
  EntropyFields out{0.5 * rho.values.square(), Field(rho.values.size())};
  for (Eigen::Index i = 0; i < rho.values.size(); ++i) out.psi[i] = fe.entropy_flux(rho.values[i]);
  return out;
}

}  // namespace nlt
