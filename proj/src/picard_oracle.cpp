#include <cmath>
#include <sstream>

#include "nlt/nonlocal_solver.hpp"

namespace nlt {

namespace {

// Linear interpolation of data sampled at x_min + (j + offset) dx, j = 0..m-1,
// clamped or wrapped according to the boundary mode.
struct LinearSampler {
  double x_min, dx, offset, length;
  bool periodic;

  double operator()(const double* data, int m, double x) const {
    double s = (x - x_min) / dx - offset;
    if (periodic) {
      const double period = length / dx;
      s = std::fmod(s, period);
      if (s < 0.0) s += period;
      int j = static_cast<int>(std::floor(s));
      const double w = s - j;
      j %= m;
      return (1.0 - w) * data[j] + w * data[(j + 1) % m];
    }
    if (s <= 0.0) return data[0];
    if (s >= m - 1) return data[m - 1];
    const int j = static_cast<int>(std::floor(s));
    const double w = s - j;
    return (1.0 - w) * data[j] + w * data[j + 1];
  }
};

}  // namespace

PicardResult picard_oracle(const DensityField& initial, const VelocityModel& model, KernelScale eps,
                           double t0, double tolerance, int max_sweeps) {
  const Grid& grid = initial.grid;
  if (initial.values.minCoeff() <= 0.0)
    throw Error(ErrorCode::positivity, "picard oracle needs uniformly positive initial data");
  if (!(t0 >= 0.0) || !(tolerance > 0.0))
    throw Error(ErrorCode::domain, "picard oracle needs t0 >= 0 and a positive tolerance");

  const int n = grid.n_cells();
  const double dx = grid.dx();
  const double e = eps.epsilon();
  const double beta = std::exp(-dx / e);
  const double v0 = model.free_speed();
  if (t0 == 0.0) return {initial, 0, 0, {}, 0.0};

  // Characteristic steps move at most half a cell.
  const int levels = std::max(4, static_cast<int>(std::ceil(t0 * v0 / (0.5 * dx))));
  const double h = t0 / levels;

  // Level-major storage: guess(level, cell) and edges(level, edge) with the ghost edge n.
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> guess(levels + 1, n), next(levels + 1, n);
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> edges(levels + 1, n + 1);
  for (int k = 0; k <= levels; ++k) guess.row(k) = initial.values.transpose();

  const LinearSampler at_center{grid.x_min(), dx, 0.5, grid.length(), grid.periodic()};
  const LinearSampler at_edge{grid.x_min(), dx, 0.0, grid.length(), grid.periodic()};
  const int edge_count = grid.periodic() ? n : n + 1;

  PicardResult result{initial, 0, levels, {}, 0.0};
  int growth_streak = 0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int k = 0; k <= levels; ++k) {
      Field row = guess.row(k).transpose();
      Field q = exponential_recursion(row, beta, grid.boundary());
      edges.row(k).head(n) = q.transpose();
      edges(k, n) = grid.periodic() ? q[0] : row[n - 1];
    }
    auto q_at = [&](int k, double x) { return at_edge(&edges(k, 0), edge_count, x); };
    auto log_rate = [&](int k, double x) {
      const double qv = q_at(k, x);
      const double rv = at_center(&guess(k, 0), n, x);
      return -model.derivative(qv) * (qv - rv) / e;
    };

    next.row(0) = guess.row(0);
    for (int k = 1; k <= levels; ++k) {
      for (int i = 0; i < n; ++i) {
        double x = grid.center(i);
        double log_gain = 0.0;
        double rate_now = log_rate(k, x);
        for (int j = k; j >= 1; --j) {
          const double s1 = model(q_at(j, x));
          const double xp = x - h * s1;
          const double s2 = model(q_at(j - 1, xp));
          const double xn = x - 0.5 * h * (s1 + s2);
          const double rate_prev = log_rate(j - 1, xn);
          log_gain += 0.5 * h * (rate_now + rate_prev);
          x = xn;
          rate_now = rate_prev;
        }
        next(k, i) = at_center(&guess(0, 0), n, x) * std::exp(log_gain);
      }
    }

    const double increment = (next - guess).abs().maxCoeff();
    if (!std::isfinite(increment))
      throw Error(ErrorCode::blowup, "picard iterate became non-finite at sweep " + std::to_string(sweep));
    guess.swap(next);
    if (!result.increments.empty() && result.increments.back() > 0.0) {
      const double ratio = increment / result.increments.back();
      result.contraction_factor = std::max(result.contraction_factor, ratio);
      growth_streak = ratio > 1.0 ? growth_streak + 1 : 0;
      if (growth_streak >= 3) {
        std::ostringstream os;
        os << "characteristic map is not contracting: increment grew for 3 sweeps (last ratio " << ratio << ")";
        throw Error(ErrorCode::contraction_failure, os.str());
      }
    }
    result.increments.push_back(increment);
    result.sweeps = sweep;
    if (increment < tolerance) {
      result.rho = DensityField{grid, guess.row(levels).transpose()};
      return result;
    }
  }
  std::ostringstream os;
  os << "picard iteration did not reach " << tolerance << " within " << max_sweeps << " sweeps";
  throw Error(ErrorCode::contraction_failure, os.str());
}

}  // namespace nlt
