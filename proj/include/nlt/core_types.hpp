#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlt/errors.hpp"

namespace nlt {

using Field = Eigen::ArrayXd;

enum class Boundary { periodic, constant_extension };

/// Uniform 1-D grid of finite-volume cells on [x_min, x_max].
class Grid {
 public:
  Grid(double x_min, double x_max, int n_cells, Boundary boundary);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int n_cells() const { return n_cells_; }
  Boundary boundary() const { return boundary_; }
  double length() const { return x_max_ - x_min_; }
  double dx() const { return (x_max_ - x_min_) / n_cells_; }
  bool periodic() const { return boundary_ == Boundary::periodic; }

  double center(int i) const { return x_min_ + (i + 0.5) * dx(); }
  double left_edge(int i) const { return x_min_ + i * dx(); }
  Field centers() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  int n_cells_;
  Boundary boundary_;
};

/// Cell-averaged car density at one time instant.
struct DensityField {
  DensityField(Grid g, Field v);

  Grid grid;
  Field values;

  double mass() const { return values.sum() * grid.dx(); }
};

/// Speed law v(rho) on [0, rho_jam] together with v', v'' and the inverse map.
class VelocityModel {
 public:
  enum class Kind { affine, custom };

  struct Evaluators {
    std::function<double(double)> v;
    std::function<double(double)> dv;
    std::function<double(double)> d2v;
    std::function<double(double)> inverse;
  };

  /// v(rho) = a - b rho, rho_jam = a / b.
  static VelocityModel affine(double a, double b);
  static VelocityModel custom(std::string name, double rho_jam, Evaluators e);

  Kind kind() const { return kind_; }
  bool is_affine() const { return kind_ == Kind::affine; }
  const std::string& name() const { return name_; }
  double rho_jam() const { return rho_jam_; }
  // Affine coefficients; zero for custom models.
  double a() const { return a_; }
  double b() const { return b_; }

  double operator()(double rho) const {
    return is_affine() ? a_ - b_ * rho : eval_.v(rho);
  }
  double derivative(double rho) const { return is_affine() ? -b_ : eval_.dv(rho); }
  double second_derivative(double rho) const { return is_affine() ? 0.0 : eval_.d2v(rho); }
  double inverse(double speed) const {
    return is_affine() ? (a_ - speed) / b_ : eval_.inverse(speed);
  }

  double free_speed() const { return (*this)(0.0); }

  /// Sup of |v'| and |v''| over [0, rho_jam], exact for affine models, sampled otherwise.
  double max_abs_derivative() const { return max_dv_; }
  double max_abs_second_derivative() const { return max_d2v_; }
  double min_abs_derivative() const { return min_dv_; }

  template <typename Derived>
  Field apply(const Eigen::ArrayBase<Derived>& rho) const {
    if (is_affine()) return a_ - b_ * rho.derived().array();
    return rho.derived().unaryExpr([this](double r) { return eval_.v(r); });
  }

 private:
  VelocityModel() = default;
  void tabulate_bounds();

  Kind kind_ = Kind::affine;
  std::string name_;
  double rho_jam_ = 1.0;
  double a_ = 0.0;
  double b_ = 0.0;
  Evaluators eval_;
  double max_dv_ = 0.0;
  double max_d2v_ = 0.0;
  double min_dv_ = 0.0;
};

/// Length scale epsilon of the rescaled exponential kernel.
class KernelScale {
 public:
  explicit KernelScale(double epsilon);
  double epsilon() const { return epsilon_; }

 private:
  double epsilon_;
};

struct SolverConfig {
  double cfl = 0.5;
  double t_final = 0.0;
  std::vector<double> snapshot_times;

  void validate() const;
  /// Requested snapshot times merged with t = 0 and t_final, sorted and unique.
  std::vector<double> output_times() const;
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // positive when satisfied
  std::string detail;
};

struct ModelReport {
  double v_jam_residual = 0.0;
  double max_derivative = 0.0;  // max over samples of v'
  double delta_star = 0.0;      // -max v'
  double second_derivative_sup = 0.0;
  double inverse_max_error = 0.0;
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
};

/// Checks the speed law against the standing assumptions on n_samples points of [0, rho_jam].
ModelReport validate_model(const VelocityModel& model, int n_samples);

namespace preset {
struct Riemann {
  double left, right, x0;
};
struct Bump {
  double base, amp, center, width;
};
struct Sine {
  double mean, amp, wavelength;
};
struct MonotoneRamp {
  double left, right, x0, x1;
};
struct Custom {
  std::vector<double> values;
};
}  // namespace preset

using InitialPreset =
    std::variant<preset::Riemann, preset::Bump, preset::Sine, preset::MonotoneRamp, preset::Custom>;

/// Exact cell averages of the preset profile. Bumps use the C^2 profile
/// base + amp (1 - r^2)^3 with r = (x - center) / width.
DensityField make_initial(const Grid& grid, const InitialPreset& preset, double rho_jam);

}  // namespace nlt
