#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "ssep/errors.hpp"
#include "ssep/exact_oracle.hpp"
#include "ssep/experiments.hpp"
#include "ssep/fluctuations.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/rng.hpp"
#include "ssep/triangle.hpp"

using namespace ssep;

namespace {

Profile1D random_profile(int n, const BoundaryParams& bp, double slope, RandomStream& rng) {
  Profile1D p(n, bp);
  double v = bp.alpha;
  for (int x = 1; x < n; ++x) {
    v = std::clamp(v + (2.0 * rng.uniform() - 1.0) * slope / n, 0.0, 1.0);
    p.set(x, v);
  }
  return p;
}

double max_diff(const Profile1D& a, const Profile1D& b) {
  double m = 0.0;
  for (int x = 0; x <= a.n(); ++x) m = std::max(m, std::abs(a[x] - b[x]));
  return m;
}

double max_diff(const TriangleField& a, const TriangleField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("discrete laplacian on linear and quadratic profiles") {
  const auto bp = BoundaryParams::make(0.2, 0.9);
  for (double v : laplacian_1d(Profile1D::linear(16, bp))) CHECK(std::abs(v) < 1e-12);
  const auto q = Profile1D::from_function(10, BoundaryParams::make(0.0, 1.0), [](double u) { return u * u; });
  for (double v : laplacian_1d(q)) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("profiles keep their reservoir entries") {
  Profile1D p(5, BoundaryParams::make(0.1, 0.4));
  CHECK(p[0] == 0.1);
  CHECK(p[5] == 0.4);
  CHECK_THROWS_AS(p.set(0, 0.3), std::out_of_range);
  CHECK_THROWS_AS(p.set(5, 0.3), std::out_of_range);
}

TEST_CASE("heat solution: stationary, single mode and semigroup") {
  const auto bp = BoundaryParams::make(0.3, 0.7);
  const Profile1D lin = Profile1D::linear(12, bp);
  CHECK(max_diff(solve_heat_1d(lin, 0.37), lin) < 1e-14);

  const int n = 8;
  Profile1D p0 = Profile1D::linear(n, bp);
  for (int x = 1; x < n; ++x) p0.set(x, p0[x] + 0.1 * std::sin(std::numbers::pi * x / n));
  const double tau = 0.013;
  // Direct matrix exponential of the scaled second-difference matrix.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    a(i, i) = -2.0 * n * n;
    if (i > 0) a(i, i - 1) = n * n;
    if (i < n - 2) a(i, i + 1) = n * n;
  }
  const Eigen::MatrixXd e = (a * tau).exp();
  Eigen::VectorXd dev(n - 1);
  for (int x = 1; x < n; ++x) dev(x - 1) = p0[x] - Profile1D::linear(n, bp)[x];
  const Eigen::VectorXd ev = e * dev;
  const Profile1D sol = solve_heat_1d(p0, tau);
  const double mu1 = 4.0 * n * n * std::pow(std::sin(std::numbers::pi / (2.0 * n)), 2);
  for (int x = 1; x < n; ++x) {
    CHECK(sol[x] - Profile1D::linear(n, bp)[x] == doctest::Approx(ev(x - 1)).epsilon(1e-10));
    CHECK(sol[x] - Profile1D::linear(n, bp)[x] ==
          doctest::Approx(0.1 * std::exp(-mu1 * tau) * std::sin(std::numbers::pi * x / n)).epsilon(1e-10));
  }

  RandomStream rng(3, 0);
  const Profile1D q = random_profile(20, bp, 3.0, rng);
  CHECK(max_diff(solve_heat_1d(solve_heat_1d(q, 0.01), 0.03), solve_heat_1d(q, 0.04)) < 1e-10);

  const HeatSolver1D hs(q);
  double init = 0.0;
  for (int x = 1; x < 20; ++x) init = std::max(init, std::abs(q[x] - hs.stationary()[x]));
  const double tau_big = 0.5;
  CHECK(max_diff(hs.at(tau_big), hs.stationary()) <= std::exp(-hs.mode_rate(1) * tau_big) * init * std::sqrt(19.0) + 1e-15);
}

TEST_CASE("time integral of the heat solution") {
  RandomStream rng(11, 0);
  const auto bp = BoundaryParams::make(0.8, 0.1);
  const HeatSolver1D hs(random_profile(16, bp, 4.0, rng));
  const double tau = 0.05;
  const int m = 2000;
  Profile1D simpson(16, bp);
  std::vector<double> acc(17, 0.0);
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const Profile1D r = hs.at(tau * i / m);
    for (int x = 0; x <= 16; ++x) acc[static_cast<std::size_t>(x)] += w * r[x];
  }
  const Profile1D integ = hs.integral(tau);
  for (int x = 0; x <= 16; ++x) CHECK(integ[x] == doctest::Approx(acc[static_cast<std::size_t>(x)] * tau / (3.0 * m)).epsilon(1e-9));
}

TEST_CASE("gradient maximum principle") {
  const auto bp = BoundaryParams::make(0.2, 0.6);
  const std::vector<double> taus{0.0, 0.01, 0.1, 1.0};
  const auto lin = gradient_maxprinciple_check(Profile1D::linear(10, bp), taus);
  CHECK(lin.holds);
  CHECK(lin.initial_max == doctest::Approx(0.4));
  CHECK(lin.observed_max == doctest::Approx(0.4));

  RandomStream rng(21, 0);
  for (int i = 0; i < 25; ++i) {
    const Profile1D p = random_profile(50, BoundaryParams::make(rng.uniform(), rng.uniform()), 6.0, rng);
    std::vector<double> t(20);
    for (auto& v : t) v = 2.0 * rng.uniform();
    std::sort(t.begin(), t.end());
    CHECK(gradient_maxprinciple_check(p, t).holds);
  }
  Profile1D spike(30, BoundaryParams::make(0.0, 0.0));
  spike.set(15, 1.0);
  CHECK(gradient_maxprinciple_check(spike, taus).holds);
}

TEST_CASE("triangle laplacian stencil") {
  const int n = 6;
  CHECK(laplacian_triangle(TriangleField(n)).sup_norm() == 0.0);
  const auto f = TriangleField::from_function(n, [n](int x, int y) { return (x / double(n)) * (1.0 - y / double(n)); });
  const TriangleField lf = laplacian_triangle(f);
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y) {
      if (y == x + 1)
        CHECK(lf.at(x, y) == doctest::Approx(-(n - 1.0)).epsilon(1e-12));
      else
        CHECK(std::abs(lf.at(x, y)) < 1e-12);
    }
  CHECK(f.at(0, 3) == 0.0);
  CHECK(f.at(2, n) == 0.0);
  CHECK_THROWS(f.at(3, 3));
  CHECK_THROWS(f.at(4, 2));
}

TEST_CASE("sparse operator is symmetric and matches the stencil") {
  const int n = 9;
  const Eigen::SparseMatrix<double> a = negative_triangle_laplacian(n);
  const Eigen::MatrixXd d(a);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  RandomStream rng(2, 0);
  TriangleField f(n);
  for (auto& v : f.data()) v = rng.uniform() - 0.5;
  const Eigen::Map<const Eigen::VectorXd> fv(f.data().data(), static_cast<Eigen::Index>(f.data().size()));
  const Eigen::VectorXd af = d * fv;
  const TriangleField lf = laplacian_triangle(f);
  for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(af(static_cast<Eigen::Index>(i)) == doctest::Approx(-lf.data()[i]).epsilon(1e-12));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("green function") {
  CHECK(solve_green_triangle(10, 0.0).sup_norm() == 0.0);
  for (int n : {3, 8, 16, 33, 64}) {
    const TriangleField g = solve_green_triangle(n, 1.0);
    CHECK(max_diff(g, green_closed_form(n, 1.0)) < 1e-8);
    CHECK(g.max_value() <= 1.0 / (4.0 * (n - 1)) + 1e-15);
    const TriangleField g2 = solve_green_triangle(n, 2.0);
    for (std::size_t i = 0; i < g.data().size(); ++i) CHECK(std::abs(g2.data()[i] - 2.0 * g.data()[i]) < 1e-12);
  }
}

TEST_CASE("parabolic solver: zero data, maximum principle, stationary limit") {
  const int n = 20;
  auto zero = [n](double) { return DiagonalSource(n); };
  CHECK(solve_parabolic_triangle(TriangleField(n), zero, 0.1).field.sup_norm() == 0.0);

  RandomStream rng(4, 0);
  ParabolicOptions raw;
  raw.refine = false;
  raw.initial_steps = 100;
  for (int i = 0; i < 20; ++i) {
    TriangleField h(n);
    for (auto& v : h.data()) v = 2.0 * rng.uniform() - 1.0;
    const auto sol = solve_parabolic_triangle(h, zero, 0.2 * rng.uniform() + 0.01, raw);
    CHECK(sol.max_value <= h.max_value() + 1e-9);
    CHECK(sol.sup_norm <= h.sup_norm() + 1e-9);
  }

  const int m = 12;
  const auto sol = solve_parabolic_triangle(TriangleField(m), [m](double) { return DiagonalSource(m, 1.0); }, 3.0);
  CHECK(max_diff(sol.field, solve_green_triangle(m, 1.0)) < 1e-6);
}

TEST_CASE("refined parabolic solution converges under step halving") {
  const int n = 10;
  TriangleField h(n);
  RandomStream rng(8, 0);
  for (auto& v : h.data()) v = rng.uniform();
  auto g = [n](double t) { return DiagonalSource(n, std::cos(3.0 * t)); };
  const auto a = solve_parabolic_triangle(h, g, 0.05);
  ParabolicOptions fine;
  fine.initial_steps = 8000;
  const auto b = solve_parabolic_triangle(h, g, 0.05, fine);
  CHECK(max_diff(a.field, b.field) < 1e-7);
}

TEST_CASE("correlation evolution") {
  const auto flat = BoundaryParams::make(0.4, 0.4);
  const auto ce0 = correlation_evolution(TriangleField(10), Profile1D::linear(10, flat), 0.2);
  CHECK(ce0.solution.field.sup_norm() < 1e-14);

  // The stationary two-point function is invariant.
  const int n = 8;
  const auto bp = BoundaryParams::make(0.1, 0.8);
  const auto sd = stationary_distribution(build_generator_dense(n, bp));
  const TriangleField h = exact_two_point(sd);
  const auto ce = correlation_evolution(h, Profile1D::linear(n, bp), 0.3);
  CHECK(max_diff(ce.solution.field, h) < 1e-8);
  CHECK(ce.bound_holds);

  // From a product measure the diagonal approaches the Green formula with the oracle's sign.
  const int sigma = exact_check(6, BoundaryParams::make(0.0, 1.0)).sign;
  const int m = 32;
  const auto ab = BoundaryParams::make(0.0, 1.0);
  const Profile1D p0 = Profile1D::from_function(m, ab, [](double u) { return u * u; });
  const auto late = correlation_evolution(TriangleField(m), p0, 2.0);
  for (int x = 1; x <= m - 2; ++x)
    CHECK(late.solution.field.at(x, x + 1) ==
          doctest::Approx(sigma / (m - 1.0) * (x / double(m)) * (1.0 - (x + 1.0) / m)).epsilon(1e-6));
  CHECK(late.bound_holds);
}

TEST_CASE("correlation bound on random inputs") {
  RandomStream rng(17, 0);
  for (int n : {16, 32}) {
    for (int i = 0; i < 4; ++i) {
      const auto bp = BoundaryParams::make(rng.uniform(), rng.uniform());
      TriangleField h(n);
      for (auto& v : h.data()) v = (rng.uniform() - 0.5) / n;
      const auto ce = correlation_evolution(h, random_profile(n, bp, 3.0, rng), 0.1);
      CHECK(ce.bound_holds);
      CHECK(ce.bound == doctest::Approx((2.0 * ce.c0 + ce.c0 * ce.c0) / (2.0 * n)));
    }
  }
}

TEST_CASE("Monte Carlo two-point function follows the correlation evolution") {
  const int n = 32;
  const auto bp = BoundaryParams::make(0.0, 1.0);
  auto gamma = [](double u) { return u * u; };
  EnsembleSpec spec;
  spec.n = n;
  spec.bp = bp;
  spec.initial = InitialCondition::Product;
  spec.gamma = gamma;
  spec.replicas = 40000;
  spec.times = {0.05};
  spec.seed = 2024;
  spec.modes = 1;
  spec.record_pairs = true;
  const EnsembleResult res = run_ensemble(spec);
  const TriangleField mc = res.two_point(0);
  const TriangleField se = res.two_point_se(0);
  const auto ce = correlation_evolution(TriangleField(n), Profile1D::from_function(n, bp, gamma), 0.05);
  int outside = 0;
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y)
      if (std::abs(mc.at(x, y) - ce.solution.field.at(x, y)) > 4.0 * se.at(x, y)) ++outside;
  CHECK(outside == 0);
}
