#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlt/relaxation.hpp"

namespace nlt {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

RelaxationFrame::RelaxationFrame(double K, KernelScale eps, VelocityModel model)
    : K_(K), eps_(eps), model_(std::move(model)) {
  if (!(K > model_.free_speed()) || !std::isfinite(K))
    throw Error(ErrorCode::frame, "relaxation frame needs K > v(0) = " + num(model_.free_speed()) +
                                      ", got K = " + num(K));
}

double RelaxationFrame::z_min() const { return std::log(K_ - model_.free_speed()); }
double RelaxationFrame::z_max() const { return std::log(K_); }

CharacteristicSpeeds speeds(double q, const RelaxationFrame& frame) {
  const double rj = frame.model().rho_jam();
  if (q < 0.0 || q > rj) throw Error(ErrorCode::domain, "speeds: q outside [0, rho_jam]");
  const double K = frame.K();
  const double v = frame.model()(q);
  if (!(K > v)) throw Error(ErrorCode::frame, "speeds: K must exceed v(q)");
  return {-K, K * v / (K - v)};
}

double equilibrium_speed(double rho, const RelaxationFrame& frame) {
  const double rj = frame.model().rho_jam();
  if (rho < 0.0 || rho > rj) throw Error(ErrorCode::domain, "equilibrium_speed: rho outside [0, rho_jam]");
  const VelocityModel& m = frame.model();
  const double fp = m(rho) + rho * m.derivative(rho);
  const double K = frame.K();
  if (!(K > fp)) throw Error(ErrorCode::frame, "equilibrium_speed: K must exceed f'(rho)");
  return K * fp / (K - fp);
}

SubcharacteristicReport check_subcharacteristic(const RelaxationFrame& frame, int n_samples) {
  if (n_samples < 2) throw Error(ErrorCode::domain, "check_subcharacteristic needs at least 2 samples");
  SubcharacteristicReport r;
  r.samples = n_samples;
  r.lower_margin = std::numeric_limits<double>::infinity();
  r.upper_margin = std::numeric_limits<double>::infinity();
  const double rj = frame.model().rho_jam();
  for (int k = 0; k < n_samples; ++k) {
    const double rho = rj * (k + 0.5) / n_samples;
    const auto s = speeds(rho, frame);
    const double eq = equilibrium_speed(rho, frame);
    r.lower_margin = std::min(r.lower_margin, eq - s.lambda1);
    r.upper_margin = std::min(r.upper_margin, s.lambda2 - eq);
  }
  r.vacuum_gap = speeds(0.0, frame).lambda2 - equilibrium_speed(0.0, frame);
  r.passed = r.lower_margin > 0.0 && r.upper_margin > 0.0;
  return r;
}

bool BvConditionReport::passed() const {
  return local_tv.passed && global_tv.passed && (!affine_tv || affine_tv->passed) && source_u.passed &&
         source_z.passed;
}

BvConditionReport check_bv_conditions(const RelaxationFrame& frame, double rho1, double rho2, int n_samples) {
  const VelocityModel& m = frame.model();
  const double rj = m.rho_jam();
  if (!(rho1 >= 0.0 && rho1 < rho2 && rho2 <= rj))
    throw Error(ErrorCode::domain, "check_bv_conditions needs 0 <= rho1 < rho2 <= rho_jam");
  if (n_samples < 2) throw Error(ErrorCode::domain, "check_bv_conditions needs at least 2 samples");
  const double K = frame.K();

  const double dv_sup = m.max_abs_derivative();
  const double d2v_sup = m.max_abs_second_derivative();
  const double v_sup = m.free_speed();
  double dv_min_range = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_samples; ++k)
    dv_min_range = std::min(dv_min_range, std::abs(m.derivative(rho1 + (rho2 - rho1) * k / (n_samples - 1))));
  const double dv_min_all = m.min_abs_derivative();

  BvConditionReport r;
  r.rho1 = rho1;
  r.rho2 = rho2;
  const double need = (rho2 - rho1) * (d2v_sup + dv_sup * dv_sup / (K - v_sup));
  r.local_tv = {"transformed TV non-increasing on [rho1, rho2]", dv_min_range >= need, dv_min_range - need,
                "min |v'| = " + num(dv_min_range) + ", required " + num(need)};
  const double global_need = rj * d2v_sup;
  r.global_tv = {"uniform TV bound", dv_min_all > global_need, dv_min_all - global_need,
                 "min |v'| = " + num(dv_min_all) + ", rho_jam |v''| = " + num(global_need)};
  if (m.is_affine()) {
    const double lhs = rj * dv_sup * dv_sup / (K - v_sup);
    r.affine_tv = AssumptionCheck{"affine K condition", lhs <= dv_min_all, dv_min_all - lhs,
                                  "rho_jam |v'|^2 / (K - |v|) = " + num(lhs)};
    r.minimal_K = v_sup + rj * dv_sup * dv_sup / dv_min_all;
  }

  // Source-term monotonicity by central differences on a lattice of (rho, q) in the range.
  const double h = 1e-6;
  double du_max = -std::numeric_limits<double>::infinity();
  double dz_min = std::numeric_limits<double>::infinity();
  const int lattice = std::min(n_samples, 41);
  for (int a = 0; a < lattice; ++a) {
    const double rho = rho1 + (rho2 - rho1) * (a + 0.5) / lattice;
    const double u = std::log(rho);
    for (int b = 0; b < lattice; ++b) {
      const double q = rho1 + (rho2 - rho1) * (b + 0.5) / lattice;
      const double z = std::log(K - m(q));
      const double lu = (lambda_source(u + h, z, frame).Lambda - lambda_source(u - h, z, frame).Lambda) / (2 * h);
      const double zl = std::max(z - h, frame.z_min());
      const double zr = std::min(z + h, frame.z_max());
      const double lz = (lambda_source(u, zr, frame).Lambda - lambda_source(u, zl, frame).Lambda) / (zr - zl);
      du_max = std::max(du_max, lu);
      dz_min = std::min(dz_min, lz);
    }
  }
  r.source_u = {"Lambda_u <= 0", du_max <= 0.0, -du_max, "max Lambda_u = " + num(du_max)};
  r.source_z = {"Lambda_z >= 0", dz_min >= 0.0, dz_min, "min Lambda_z = " + num(dz_min)};
  return r;
}

UZFields to_uz(const DensityField& rho, const Field& q, const RelaxationFrame& frame) {
  if (q.size() != rho.values.size()) throw Error(ErrorCode::shape, "to_uz: q and rho lengths differ");
  if (rho.values.minCoeff() <= 0.0)
    throw Error(ErrorCode::positivity, "to_uz: u = ln rho requires uniformly positive density");
  const double K = frame.K();
  Field speed = frame.model().apply(q);
  if ((speed >= K).any()) throw Error(ErrorCode::frame, "to_uz: K must exceed v(q)");
  return {rho.grid, rho.values.log(), (K - speed).log()};
}

UZFields to_uz(const DensityField& rho, const AveragedField& q, const RelaxationFrame& frame) {
  if (!(rho.grid == q.grid)) throw Error(ErrorCode::shape, "to_uz: density and average on different grids");
  return to_uz(rho, q.values, frame);
}

DensityField density_of(const UZFields& uz) { return {uz.grid, uz.u.exp()}; }

Field averaged_of(const UZFields& uz, const RelaxationFrame& frame) {
  const double K = frame.K();
  return uz.z.unaryExpr([&](double z) { return frame.model().inverse(K - std::exp(z)); });
}

namespace {

void require_band(double u, double z, const RelaxationFrame& frame) {
  const double slack = 1e-13;
  if (!(z >= frame.z_min() - slack && z <= frame.z_max() + slack))
    throw Error(ErrorCode::band, "z = " + num(z) + " outside [ln(K - v(0)), ln K] = [" + num(frame.z_min()) +
                                     ", " + num(frame.z_max()) + "]");
  if (!(std::exp(u) <= frame.model().rho_jam() * (1.0 + slack)))
    throw Error(ErrorCode::band, "u = " + num(u) + " gives density above rho_jam");
}

}  // namespace

double equilibrium_z(double u, const RelaxationFrame& frame) {
  return std::log(frame.K() - frame.model()(std::exp(u)));
}

SourceTerm lambda_source(double u, double z, const RelaxationFrame& frame) {
  require_band(u, z, frame);
  const VelocityModel& m = frame.model();
  const double K = frame.K();
  const double ez = std::exp(z);
  const double q = m.inverse(K - ez);
  return {(std::exp(u) - q) * m.derivative(q) / ez, equilibrium_z(u, frame)};
}

SourcePartials lambda_partials(double u, double z, const RelaxationFrame& frame) {
  const VelocityModel& m = frame.model();
  const double K = frame.K();
  const double ez = std::exp(z);  // K - v(q)
  const double q = m.inverse(K - ez);
  const double rho = std::exp(u);
  const double dv = m.derivative(q);
  const double d2v = m.second_derivative(q);
  // dLambda/dq from the quotient rule, dq/dz = -(K - v) / v'.
  const double dq = ((rho - q) * (d2v + dv * dv / ez) - dv) / ez;
  return {rho * dv / ez, dq * (-ez / dv)};
}

std::vector<TransformedTvSample> transformed_tv(const Trajectory& traj, const RelaxationFrame& frame) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3) throw Error(ErrorCode::insufficient_data, "transformed_tv needs at least 3 snapshots");
  for (const auto& s : snaps) {
    if (!s.q) throw Error(ErrorCode::insufficient_data, "transformed_tv needs snapshots with averaged fields");
    if (s.rho.values.minCoeff() <= 0.0)
      throw Error(ErrorCode::positivity, "transformed_tv: u = ln rho requires uniformly positive density");
  }
  const Grid& grid = snaps.front().rho.grid;
  const int n = grid.n_cells();
  const double K = frame.K();
  const double dx = grid.dx();

  std::vector<Field> u, z, weight;
  for (const auto& s : snaps) {
    const Field qc = center_values(s.rho, *s.q);
    const auto uz = to_uz(s.rho, qc, frame);
    u.push_back(uz.u);
    z.push_back(uz.z);
    weight.push_back(K / (K - frame.model().apply(qc)));
  }

  std::vector<TransformedTvSample> out;
  for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
    const double dt = snaps[k + 1].t - snaps[k - 1].t;
    double up = 0.0, zp = 0.0, wp = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double ux = (u[k][i + 1] - u[k][i - 1]) / (2 * dx);
      const double ut = (u[k + 1][i] - u[k - 1][i]) / dt;
      const double zx = (z[k][i + 1] - z[k][i - 1]) / (2 * dx);
      const double zt = (z[k + 1][i] - z[k - 1][i]) / dt;
      up += std::abs(ux + ut / K) * dx;
      zp += std::abs(zx + zt / K) * dx;
      wp += weight[k][i] * std::abs(ux + ut / K) * dx;
    }
    out.push_back({snaps[k].t, up, zp, wp});
  }
  return out;
}

}  // namespace nlt
