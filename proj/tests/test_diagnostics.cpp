#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlt/diagnostics.hpp"
#include "nlt/experiments.hpp"
#include "nlt/nonlocal_solver.hpp"

using namespace nlt;

namespace {

const VelocityModel kModel = VelocityModel::affine(1.0, 1.0);

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::domain;
}

SolverConfig every(double spacing, double t_final) {
  SolverConfig c;
  c.t_final = t_final;
  for (int k = 1; k * spacing < t_final - 1e-12; ++k) c.snapshot_times.push_back(k * spacing);
  return c;
}

// Every ordering of g2, used to check the rearranged pairing is the best one.
double best_pairing(const std::vector<double>& g1, std::vector<double> g2) {
  std::sort(g2.begin(), g2.end());
  double best = -1e300;
  do best = std::max(best, std::inner_product(g1.begin(), g1.end(), g2.begin(), 0.0));
  while (std::next_permutation(g2.begin(), g2.end()));
  return best;
}

}  // namespace

TEST_CASE("total variation") {
  const Eigen::ArrayXd v = (Eigen::ArrayXd(4) << 0.0, 1.0, 0.5, 0.5).finished();
  CHECK(total_variation(v, false) == 1.5);
  CHECK(total_variation(v, true) == 2.0);
  CHECK(total_variation(Eigen::ArrayXd::Constant(1, 3.0), true) == 0.0);

  Grid g(0.0, 1.0, 2048, Boundary::periodic);
  const auto s = make_initial(g, preset::Sine{0.5, 0.2, 1.0}, 1.0);
  CHECK(total_variation(s) == doctest::Approx(0.8).epsilon(1e-4));
}

TEST_CASE("L1 distance") {
  Grid g(0.0, 2.0, 4, Boundary::periodic);
  DensityField a(g, Field::Constant(4, 0.5));
  DensityField b(g, (Field(4) << 0.5, 0.7, 0.5, 0.1).finished());
  CHECK(l1_distance(a, b) == doctest::Approx(0.3));
  CHECK(l1_distance(a, a) == 0.0);
  DensityField c(Grid(0.0, 2.0, 8, Boundary::periodic), Field::Zero(8));
  CHECK(code_of([&] { l1_distance(a, c); }) == ErrorCode::shape);
}

TEST_CASE("kernel deviation") {
  const KernelScale eps(0.1);
  Grid g(-2.0, 2.0, 4096, Boundary::constant_extension);
  const auto step = make_initial(g, preset::Riemann{0.8, 0.2, 0.0}, 1.0);
  const auto d = kernel_deviation(step, average(step, eps));
  CHECK(d.bound == doctest::Approx(0.06));
  CHECK(d.deviation == doctest::Approx(0.06).epsilon(0.02));

  std::mt19937_64 rng(11);
  Grid h(0.0, 1.0, 512, Boundary::periodic);
  for (int k = 0; k < 20; ++k) {
    const auto rho = random_bv_field(h, rng, 0.0, 1.0, 9);
    const auto r = kernel_deviation(rho, average(rho, KernelScale(0.05)));
    CHECK(r.deviation <= r.bound * (1.0 + 1e-12));
  }
}

TEST_CASE("test function") {
  const TestFunction phi{0.0, 0.5, 0.4, 0.2};
  CHECK(phi(0.5, 0.0) == 1.0);
  CHECK(phi(0.5, 0.4) == 0.0);
  CHECK(phi(0.8, 0.0) == 0.0);
  const double h = 1e-6;
  for (double x : {-0.3, -0.1, 0.05, 0.2}) {
    for (double t : {0.35, 0.5, 0.62}) {
      CHECK(phi.dx(t, x) == doctest::Approx((phi(t, x + h) - phi(t, x - h)) / (2 * h)).epsilon(1e-6));
      CHECK(phi.dt(t, x) == doctest::Approx((phi(t + h, x) - phi(t - h, x)) / (2 * h)).epsilon(1e-6));
      CHECK(phi.dxx(t, x) == doctest::Approx((phi.dx(t, x + h) - phi.dx(t, x - h)) / (2 * h)).epsilon(1e-5));
      CHECK(phi(t, x) >= 0.0);
    }
  }
}

TEST_CASE("entropy residual") {
  const FluxEntropyModel fe(kModel);
  Grid g(-1.0, 1.0, 1024, Boundary::constant_extension);
  const std::vector<TestFunction> phis = {{0.0, 0.25, 0.3, 0.2}, {0.2, 0.25, 0.3, 0.2}};

  SUBCASE("smooth local solution has no production") {
    const auto rho = make_initial(g, preset::Bump{0.3, 0.2, 0.0, 0.4}, 1.0);
    const auto r = entropy_residual(solve_local(rho, fe, every(0.0025, 0.5)), fe, phis);
    for (double v : r) CHECK(std::abs(v) <= 1e-4);
  }
  SUBCASE("a shock dissipates entropy") {
    const auto rho = make_initial(g, preset::Riemann{0.2, 0.8, 0.0}, 1.0);
    const auto r = entropy_residual(solve_local(rho, fe, every(0.0025, 0.5)), fe, {phis[0]});
    CHECK(r[0] < 0.0);
  }
  SUBCASE("constant data") {
    DensityField rho(g, Field::Constant(1024, 0.4));
    const auto r = entropy_residual(solve_local(rho, fe, every(0.0025, 0.5)), fe, phis);
    for (double v : r) CHECK(std::abs(v) <= 1e-8);
  }
  SUBCASE("bad inputs") {
    DensityField rho(g, Field::Constant(1024, 0.4));
    const auto traj = solve_local(rho, fe, every(0.0025, 0.5));
    CHECK(code_of([&] { entropy_residual(traj, fe, {{0.0, 0.4, 0.3, 0.2}}); }) == ErrorCode::support);
    CHECK(code_of([&] { entropy_residual(traj, fe, {{0.9, 0.25, 0.3, 0.2}}); }) == ErrorCode::support);
    CHECK(code_of([&] { entropy_residual(traj, fe, {{0.0, 0.25, 0.0, 0.2}}); }) == ErrorCode::domain);
    const auto coarse = solve_local(rho, fe, every(0.05, 0.5));
    CHECK(code_of([&] { entropy_residual(coarse, fe, phis); }) == ErrorCode::insufficient_data);
  }
}

TEST_CASE("symmetric rearrangement") {
  CHECK(symmetric_rearrangement({3, 1, 2}) == std::vector<double>{1, 3, 2});
  CHECK(symmetric_rearrangement_left_first({3, 1, 2}) == std::vector<double>{2, 3, 1});
  CHECK(symmetric_rearrangement({}).empty());
  CHECK(code_of([] { symmetric_rearrangement({1.0, -0.5}); }) == ErrorCode::domain);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n < 40; ++n) {
    std::vector<double> g(n);
    for (auto& v : g) v = u(rng);
    const auto s = symmetric_rearrangement(g);
    auto a = g, b = s;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    // Unimodal around the centre.
    const long c = (n - 1) / 2;
    for (long i = c; i + 1 < n; ++i) CHECK(s[i] >= s[i + 1]);
    for (long i = c; i > 0; --i) CHECK(s[i] >= s[i - 1]);
  }
}

TEST_CASE("Hardy-Littlewood gap") {
  CHECK(hardy_littlewood_gap({1, 2}, {2, 1}) == doctest::Approx(1.0));
  CHECK(hardy_littlewood_gap({1, 2}, {1, 2}) == doctest::Approx(0.0));
  CHECK(code_of([] { hardy_littlewood_gap({1, 2}, {1}); }) == ErrorCode::shape);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 7;
    std::vector<double> g1(n), g2(n);
    for (auto& v : g1) v = u(rng);
    for (auto& v : g2) v = u(rng);
    const double gap = hardy_littlewood_gap(g1, g2);
    CHECK(gap >= -1e-12);
    const double base = std::inner_product(g1.begin(), g1.end(), g2.begin(), 0.0);
    // Rearranged pairing equals the best pairing over all orderings.
    CHECK(base + gap == doctest::Approx(best_pairing(symmetric_rearrangement(g1), g2)).epsilon(1e-12));
  }
}

TEST_CASE("shifted product") {
  const auto r = shifted_product_check({1, 2, 3}, 1);
  CHECK(r.lhs == doctest::Approx(23.0));
  CHECK(r.rhs == doctest::Approx(36.0));

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> h(1 + k % 23);
    for (auto& v : h) v = u(rng);
    const auto s = shifted_product_check(h, static_cast<long>(k % 5) - 2);
    CHECK(s.lhs <= s.rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("stability gap") {
  const KernelScale eps(0.1);
  Grid g(0.0, 1.0, 128, Boundary::periodic);
  const auto a = make_initial(g, preset::Sine{0.5, 0.2, 1.0}, 1.0);
  DensityField b = a;
  b.values += 1e-2 * (2.0 * M_PI * Eigen::ArrayXd::LinSpaced(128, 0.0, 127.0) / 128.0).sin();
  const auto c = every(0.1, 0.5);
  const auto s = stability_gap(solve_nonlocal(a, kModel, eps, c), solve_nonlocal(b, kModel, eps, c));
  REQUIRE(s.ratios.size() == 6);
  CHECK(s.ratios[0] == 1.0);
  CHECK(s.sup_ratio >= 1.0);
  CHECK(s.sup_ratio == *std::max_element(s.ratios.begin(), s.ratios.end()));

  const auto ta = solve_nonlocal(a, kModel, eps, c);
  CHECK(code_of([&] { stability_gap(ta, ta); }) == ErrorCode::degenerate);
  CHECK(code_of([&] { stability_gap(ta, solve_nonlocal(b, kModel, eps, every(0.25, 0.5))); }) == ErrorCode::shape);
}
