#include <doctest.h>

#include <cmath>
#include <random>

#include "nlt/experiments.hpp"
#include "nlt/kernel_average.hpp"

using namespace nlt;

namespace {

DensityField random_field(const Grid& g, std::mt19937_64& rng) { return random_bv_field(g, rng, 0.05, 0.95, 15); }

}  // namespace

TEST_CASE("constant field averages to itself") {
  for (auto bc : {Boundary::periodic, Boundary::constant_extension}) {
    Grid g(0.0, 1.0, 32, bc);
    DensityField rho(g, Field::Constant(32, 0.4));
    for (double eps : {0.01, 0.3, 5.0}) {
      CHECK((average(rho, KernelScale(eps)).values - 0.4).abs().maxCoeff() < 1e-15);
      CHECK((average(rho, KernelScale(eps), Quadrature{}).values - 0.4).abs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("step data match the closed-form average") {
  const double eps = 0.1;
  Grid g(-1.0, 1.0, 64, Boundary::constant_extension);
  const auto rho = make_initial(g, preset::Riemann{0.2, 0.8, 0.0}, 1.0);
  for (const AverageMethod& m : {AverageMethod(ExactRecursion{}), AverageMethod(Quadrature{1e-12})}) {
    const auto q = average(rho, KernelScale(eps), m);
    for (int i = 0; i < 64; ++i) {
      const double x = g.left_edge(i);
      const double expected = x < 0.0 ? 0.2 * (1.0 - std::exp(x / eps)) + 0.8 * std::exp(x / eps) : 0.8;
      CHECK(q.values[i] == doctest::Approx(expected).epsilon(1e-11));
    }
  }
  const auto q = average(rho, KernelScale(eps));
  const Field qc = center_values(rho, q);
  for (int i = 0; i < 64; ++i) {
    const double x = g.center(i);
    const double expected = x < 0.0 ? 0.2 + 0.6 * std::exp(x / eps) : 0.8;
    CHECK(qc[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(trailing_edge_value(rho, q) == 0.8);
}

TEST_CASE("recursion agrees with the quadrature oracle on random fields") {
  std::mt19937_64 rng(3);
  for (auto bc : {Boundary::periodic, Boundary::constant_extension}) {
    Grid g(0.0, 2.0, 128, bc);
    for (double eps : {0.01, 0.1, 1.0}) {
      const auto rho = random_field(g, rng);
      const auto a = average(rho, KernelScale(eps));
      const auto b = average(rho, KernelScale(eps), Quadrature{1e-11});
      CHECK((a.values - b.values).abs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("periodic closure equals summing shifted copies") {
  Grid g(0.0, 1.0, 16, Boundary::periodic);
  std::mt19937_64 rng(5);
  const auto rho = random_field(g, rng);
  const double eps = 0.7, beta = std::exp(-g.dx() / eps);
  const auto q = average(rho, KernelScale(eps));
  // Brute force: tile 60 periods to the right.
  for (int i = 0; i < 16; ++i) {
    double s = 0.0, w = 1.0;
    for (int k = 0; k < 16 * 60; ++k) {
      s += (1.0 - beta) * w * rho.values[(i + k) % 16];
      w *= beta;
    }
    CHECK(q.values[i] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("exact recursion solves the kernel ODE") {
  std::mt19937_64 rng(9);
  Grid g(0.0, 1.0, 200, Boundary::constant_extension);
  const auto rho = random_field(g, rng);
  for (double eps : {0.005, 0.05, 0.5}) {
    const auto q = average(rho, KernelScale(eps));
    CHECK(ode_residual(rho, q) <= 1e-8 * rho.values.maxCoeff() / eps);
  }
  DensityField c(g, Field::Constant(200, 0.3));
  CHECK(ode_residual(c, average(c, KernelScale(0.1))) == 0.0);
}

TEST_CASE("a perturbed average shows up in the residual") {
  Grid g(0.0, 1.0, 100, Boundary::constant_extension);
  std::mt19937_64 rng(2);
  const auto rho = random_field(g, rng);
  const double eps = 0.1, delta = 1e-3;
  auto q = average(rho, KernelScale(eps));
  q.values[50] += delta;
  CHECK(ode_residual(rho, q) >= delta / g.dx() - delta / eps);
}

TEST_CASE("ode residual rejects mismatched grids") {
  Grid a(0.0, 1.0, 10, Boundary::periodic), b(0.0, 1.0, 12, Boundary::periodic);
  DensityField r(a, Field::Constant(10, 0.5));
  DensityField s(b, Field::Constant(12, 0.5));
  try {
    ode_residual(r, average(s, KernelScale(0.1)));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::shape);
  }
}

TEST_CASE("averaging is linear, monotone and bounded") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto bc : {Boundary::periodic, Boundary::constant_extension}) {
    Grid g(-1.0, 1.0, 64, bc);
    for (int k = 0; k < 40; ++k) {
      const auto r1 = random_field(g, rng);
      const auto r2 = random_field(g, rng);
      const double alpha = u(rng);
      const KernelScale eps(0.02 + u(rng));
      const auto q1 = average(r1, eps), q2 = average(r2, eps);
      const auto qm = average(DensityField(g, alpha * r1.values + (1 - alpha) * r2.values), eps);
      CHECK((qm.values - (alpha * q1.values + (1 - alpha) * q2.values)).abs().maxCoeff() < 1e-14);

      CHECK(q1.values.minCoeff() >= r1.values.minCoeff() - 1e-15);
      CHECK(q1.values.maxCoeff() <= r1.values.maxCoeff() + 1e-15);

      const auto upper = average(DensityField(g, r1.values.max(r2.values)), eps);
      CHECK((upper.values - q1.values).minCoeff() >= -1e-15);
    }
  }
}

TEST_CASE("q approaches rho linearly in eps for smooth data") {
  Grid g(0.0, 1.0, 4096, Boundary::periodic);
  const auto rho = make_initial(g, preset::Sine{0.5, 0.2, 1.0}, 1.0);
  const double slope = 0.2 * 2.0 * M_PI;
  for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
    const auto q = average(rho, KernelScale(eps));
    CHECK((q.values - rho.values).abs().maxCoeff() <= (eps + g.dx()) * slope);
  }
}
