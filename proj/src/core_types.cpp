#include "nlt/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nlt {

namespace {

// Shortest text that reads back to the same double.
std::string fmt_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

Grid::Grid(double x_min, double x_max, int n_cells, Boundary boundary)
    : x_min_(x_min), x_max_(x_max), n_cells_(n_cells), boundary_(boundary) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    throw Error(ErrorCode::domain, "grid requires finite x_min < x_max");
  if (n_cells < 4) throw Error(ErrorCode::domain, "grid requires at least 4 cells");
}

Field Grid::centers() const {
  Field x(n_cells_);
  for (int i = 0; i < n_cells_; ++i) x[i] = center(i);
  return x;
}

DensityField::DensityField(Grid g, Field v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.n_cells())
    throw Error(ErrorCode::shape, "density field length " + std::to_string(values.size()) +
                                      " does not match grid with " +
                                      std::to_string(grid.n_cells()) + " cells");
}

VelocityModel VelocityModel::affine(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::domain, "affine speed law v = a - b rho needs a > 0 and b > 0");
  VelocityModel m;
  m.kind_ = Kind::affine;
  m.name_ = "affine";
  m.a_ = a;
  m.b_ = b;
  m.rho_jam_ = a / b;
  m.max_dv_ = b;
  m.min_dv_ = b;
  m.max_d2v_ = 0.0;
  return m;
}

VelocityModel VelocityModel::custom(std::string name, double rho_jam, Evaluators e) {
  if (!(rho_jam > 0.0) || !std::isfinite(rho_jam))
    throw Error(ErrorCode::domain, "rho_jam must be positive and finite");
  if (!e.v || !e.dv || !e.d2v || !e.inverse)
    throw Error(ErrorCode::domain, "custom speed law must supply v, v', v'' and the inverse");
  VelocityModel m;
  m.kind_ = Kind::custom;
  m.name_ = std::move(name);
  m.rho_jam_ = rho_jam;
  m.eval_ = std::move(e);
  m.tabulate_bounds();
  return m;
}

void VelocityModel::tabulate_bounds() {
  constexpr int samples = 2001;
  max_dv_ = 0.0;
  max_d2v_ = 0.0;
  min_dv_ = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double r = rho_jam_ * k / (samples - 1);
    const double d1 = std::abs(eval_.dv(r));
    const double d2 = std::abs(eval_.d2v(r));
    if (std::isfinite(d1)) {
      max_dv_ = std::max(max_dv_, d1);
      min_dv_ = std::min(min_dv_, d1);
    }
    if (std::isfinite(d2)) max_d2v_ = std::max(max_d2v_, d2);
  }
}

KernelScale::KernelScale(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::domain, "kernel scale epsilon must be positive, got " + fmt_double(epsilon));
}

void SolverConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(ErrorCode::domain, "cfl must lie in (0, 1]");
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw Error(ErrorCode::domain, "t_final must be finite and non-negative");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
    throw Error(ErrorCode::domain, "snapshot times must be sorted");
  for (double t : snapshot_times)
    if (t < 0.0 || t > t_final)
      throw Error(ErrorCode::domain, "snapshot time " + fmt_double(t) + " outside [0, t_final]");
}

std::vector<double> SolverConfig::output_times() const {
  std::vector<double> out{0.0};
  out.insert(out.end(), snapshot_times.begin(), snapshot_times.end());
  out.push_back(t_final);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ModelReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ModelReport validate_model(const VelocityModel& model, int n_samples) {
  if (n_samples < 2) throw Error(ErrorCode::domain, "validate_model needs at least 2 samples");
  const double rj = model.rho_jam();
  auto checked = [](double value, const char* what, double rho) {
    if (!std::isfinite(value))
      throw Error(ErrorCode::model_evaluation,
                  std::string("non-finite ") + what + " at rho = " + fmt_double(rho));
    return value;
  };

  ModelReport r;
  r.v_jam_residual = std::abs(checked(model(rj), "v", rj));
  r.max_derivative = -std::numeric_limits<double>::infinity();
  double worst_rho = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double rho = rj * k / (n_samples - 1);
    const double v = checked(model(rho), "v", rho);
    const double dv = checked(model.derivative(rho), "v'", rho);
    const double d2v = checked(model.second_derivative(rho), "v''", rho);
    const double back = checked(model.inverse(v), "inverse", rho);
    if (dv > r.max_derivative) {
      r.max_derivative = dv;
      worst_rho = rho;
    }
    r.second_derivative_sup = std::max(r.second_derivative_sup, std::abs(d2v));
    r.inverse_max_error = std::max(r.inverse_max_error, std::abs(back - rho));
  }
  r.delta_star = -r.max_derivative;

  r.checks.push_back({"v(rho_jam) = 0", r.v_jam_residual <= 1e-12, 1e-12 - r.v_jam_residual,
                      "residual " + fmt_double(r.v_jam_residual)});
  r.checks.push_back({"v'(rho) <= -delta* < 0", r.max_derivative < 0.0, r.delta_star,
                      "max v' = " + fmt_double(r.max_derivative) + " at rho = " + fmt_double(worst_rho)});
  r.checks.push_back({"inverse(v(rho)) = rho", r.inverse_max_error <= 1e-10,
                      1e-10 - r.inverse_max_error, "max error " + fmt_double(r.inverse_max_error)});
  r.checks.push_back({"v'' bounded", std::isfinite(r.second_derivative_sup), 0.0,
                      "sup |v''| = " + fmt_double(r.second_derivative_sup)});
  return r;
}

namespace {

// Antiderivatives of the preset profiles; cell averages are differences over cell edges.
struct ProfilePrimitive {
  double operator()(const preset::Riemann& p, double x) const {
    return p.left * (std::min(x, p.x0) - p.x0) + p.right * std::max(x - p.x0, 0.0);
  }
  double operator()(const preset::Bump& p, double x) const {
    const double r = std::clamp((x - p.center) / p.width, -1.0, 1.0);
    const double r2 = r * r;
    // integral of (1 - r^2)^3 = r - r^3 + 3 r^5 / 5 - r^7 / 7
    const double poly = r * (1.0 - r2 + 0.6 * r2 * r2 - r2 * r2 * r2 / 7.0);
    return p.base * x + p.amp * p.width * poly;
  }
  double operator()(const preset::Sine& p, double x) const {
    const double k = 2.0 * std::numbers::pi / p.wavelength;
    return p.mean * (x - x_min) - p.amp / k * (std::cos(k * (x - x_min)) - 1.0);
  }
  double operator()(const preset::MonotoneRamp& p, double x) const {
    const double slope = (p.right - p.left) / (p.x1 - p.x0);
    if (x <= p.x0) return p.left * (x - p.x0);
    if (x <= p.x1) return p.left * (x - p.x0) + 0.5 * slope * (x - p.x0) * (x - p.x0);
    const double ramp = 0.5 * (p.left + p.right) * (p.x1 - p.x0);
    return ramp + p.right * (x - p.x1);
  }
  double operator()(const preset::Custom&, double) const { return 0.0; }

  double x_min = 0.0;
};

void require_range(double lo, double hi, double rho_jam) {
  if (!(lo >= 0.0) || !(hi <= rho_jam) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::domain, "initial density must lie in [0, rho_jam] = [0, " +
                                       fmt_double(rho_jam) + "], got range [" + fmt_double(lo) +
                                       ", " + fmt_double(hi) + "]");
}

}  // namespace

DensityField make_initial(const Grid& grid, const InitialPreset& p, double rho_jam) {
  const int n = grid.n_cells();
  Field values(n);

  if (const auto* c = std::get_if<preset::Custom>(&p)) {
    if (static_cast<int>(c->values.size()) != n)
      throw Error(ErrorCode::shape, "custom initial data has " + std::to_string(c->values.size()) +
                                        " values for " + std::to_string(n) + " cells");
    for (int i = 0; i < n; ++i) values[i] = c->values[i];
    require_range(values.minCoeff(), values.maxCoeff(), rho_jam);
    return {grid, std::move(values)};
  }

  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, preset::Riemann>) {
          if (!(q.x0 > grid.x_min() && q.x0 < grid.x_max()))
            throw Error(ErrorCode::domain, "riemann jump location must lie inside the grid");
          require_range(std::min(q.left, q.right), std::max(q.left, q.right), rho_jam);
        } else if constexpr (std::is_same_v<T, preset::Bump>) {
          if (!(q.width > 0.0)) throw Error(ErrorCode::domain, "bump width must be positive");
          require_range(std::min(q.base, q.base + q.amp), std::max(q.base, q.base + q.amp), rho_jam);
        } else if constexpr (std::is_same_v<T, preset::Sine>) {
          if (!(q.wavelength > 0.0)) throw Error(ErrorCode::domain, "sine wavelength must be positive");
          require_range(q.mean - std::abs(q.amp), q.mean + std::abs(q.amp), rho_jam);
        } else if constexpr (std::is_same_v<T, preset::MonotoneRamp>) {
          if (!(q.x1 > q.x0)) throw Error(ErrorCode::domain, "ramp needs x0 < x1");
          require_range(std::min(q.left, q.right), std::max(q.left, q.right), rho_jam);
        }
      },
      p);

  const double dx = grid.dx();
  if (const auto* r = std::get_if<preset::Riemann>(&p)) {
    for (int i = 0; i < n; ++i) {
      const double a = grid.left_edge(i), b = grid.left_edge(i + 1);
      if (b <= r->x0)
        values[i] = r->left;
      else if (a >= r->x0)
        values[i] = r->right;
      else
        values[i] = (r->left * (r->x0 - a) + r->right * (b - r->x0)) / dx;
    }
    return {grid, std::move(values)};
  }

  const ProfilePrimitive prim{grid.x_min()};
  double lower = std::visit([&](const auto& q) { return prim(q, grid.left_edge(0)); }, p);
  for (int i = 0; i < n; ++i) {
    const double upper = std::visit([&](const auto& q) { return prim(q, grid.left_edge(i + 1)); }, p);
    values[i] = (upper - lower) / dx;
    lower = upper;
  }
  // Rounding in the primitive differences can step a hair outside the profile range.
  double lo = 0.0, hi = rho_jam;
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, preset::Riemann> || std::is_same_v<T, preset::MonotoneRamp>) {
          lo = std::min(q.left, q.right);
          hi = std::max(q.left, q.right);
        } else if constexpr (std::is_same_v<T, preset::Bump>) {
          lo = std::min(q.base, q.base + q.amp);
          hi = std::max(q.base, q.base + q.amp);
        } else if constexpr (std::is_same_v<T, preset::Sine>) {
          lo = q.mean - std::abs(q.amp);
          hi = q.mean + std::abs(q.amp);
        }
      },
      p);
  values = values.max(lo).min(hi);
  return {grid, std::move(values)};
}

}  // namespace nlt
