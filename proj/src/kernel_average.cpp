#include "nlt/kernel_average.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace nlt {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussNodes{
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

constexpr double kTruncation = 40.0;  // kernel support cut at 40 eps

// Composite Gauss-Legendre integral of eps^-1 exp(-s / eps) over [a, b] with 2^level panels.
double kernel_mass(double a, double b, double eps, int level) {
  const int panels = 1 << level;
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k)
      s += kGaussWeights[k] * std::exp(-(mid + 0.5 * h * kGaussNodes[k]) / eps);
    sum += 0.5 * h * s;
  }
  return sum / eps;
}

// Weights W_k = int over [k dx, (k+1) dx] cap [0, 40 eps] of the kernel, by quadrature.
std::vector<double> kernel_weights(double dx, double eps, int level) {
  const double cut = kTruncation * eps;
  std::vector<double> w;
  for (int k = 0; k * dx < cut; ++k) w.push_back(kernel_mass(k * dx, std::min((k + 1) * dx, cut), eps, level));
  return w;
}

Field quadrature_average(const DensityField& rho, double eps, double tol) {
  const Grid& g = rho.grid;
  const int n = g.n_cells();
  auto sum_with = [&](const std::vector<double>& w) {
    Field q = Field::Zero(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const long j = i + static_cast<long>(k);
        const double r = g.periodic() ? rho.values[j % n] : rho.values[std::min<long>(j, n - 1)];
        acc += w[k] * r;
      }
      q[i] = acc;
    }
    return q;
  };

  constexpr int max_level = 16;
  Field prev = sum_with(kernel_weights(g.dx(), eps, 0));
  double change = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    Field next = sum_with(kernel_weights(g.dx(), eps, level));
    change = (next - prev).abs().maxCoeff();
    prev = std::move(next);
    if (change <= tol) return prev;
  }
  std::ostringstream os;
  os << "kernel quadrature did not reach tolerance " << tol << "; last refinement changed q by " << change;
  throw Error(ErrorCode::tolerance, os.str());
}

}  // namespace

AveragedField average(const DensityField& rho, KernelScale eps, const AverageMethod& method) {
  const double e = eps.epsilon();
  if (const auto* quad = std::get_if<Quadrature>(&method)) {
    if (!(quad->tolerance > 0.0)) throw Error(ErrorCode::domain, "quadrature tolerance must be positive");
    return {rho.grid, quadrature_average(rho, e, quad->tolerance), eps};
  }
  const double beta = std::exp(-rho.grid.dx() / e);
  return {rho.grid, exponential_recursion(rho.values, beta, rho.grid.boundary()), eps};
}

double trailing_edge_value(const DensityField& rho, const AveragedField& q) {
  return rho.grid.periodic() ? q.values[0] : rho.values[rho.values.size() - 1];
}

Field center_values(const DensityField& rho, const AveragedField& q) {
  const int n = rho.grid.n_cells();
  const double half_beta = std::exp(-0.5 * rho.grid.dx() / q.eps.epsilon());
  Field c(n);
  // Inside cell i: q(x) - rho_i = (q_{i+1} - rho_i) exp((x - x_{i+1/2}) / eps).
  for (int i = 0; i < n; ++i) {
    const double right = i + 1 < n ? q.values[i + 1] : trailing_edge_value(rho, q);
    c[i] = rho.values[i] + (right - rho.values[i]) * half_beta;
  }
  return c;
}

double ode_residual(const DensityField& rho, const AveragedField& q) {
  if (!(rho.grid == q.grid) || q.values.size() != rho.values.size())
    throw Error(ErrorCode::shape, "density and averaged field live on different grids");
  const int n = rho.grid.n_cells();
  const double eps = q.eps.epsilon();
  const double spacing = eps * std::expm1(rho.grid.dx() / eps);
  const int last = rho.grid.periodic() ? n : n - 1;
  double worst = 0.0;
  for (int i = 0; i < last; ++i) {
    const double right = i + 1 < n ? q.values[i + 1] : q.values[0];
    const double dq = std::isfinite(spacing) ? (right - q.values[i]) / spacing : 0.0;
    worst = std::max(worst, std::abs(dq - (q.values[i] - rho.values[i]) / eps));
  }
  return worst;
}

}  // namespace nlt
