#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "ssep/errors.hpp"
#include "ssep/rng.hpp"
#include "ssep/spectral.hpp"

using namespace ssep;
using std::numbers::pi;

namespace {

double adaptive(const std::function<double(double)>& f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
}

}  // namespace

TEST_CASE("sine basis values and orthonormality") {
  CHECK(sine_mode(1, 0.5) == doctest::Approx(std::numbers::sqrt2));
  CHECK(std::abs(sine_mode(3, 1.0)) < 1e-14);
  CHECK(sine_mode_derivative(2, 0.0) == doctest::Approx(std::numbers::sqrt2 * 2.0 * pi));
  const Eigen::MatrixXd g = SineBasis(48).gram(UnitQuadrature(8));
  CHECK((g - Eigen::MatrixXd::Identity(48, 48)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("semigroup and inverse laplacian act diagonally") {
  RandomStream rng(1, 0);
  ModeVector v(20);
  for (auto& c : v.coeffs) c = rng.uniform() - 0.5;
  const ModeVector a = semigroup_apply(0.01, semigroup_apply(0.02, v));
  const ModeVector b = semigroup_apply(0.03, v);
  for (int n = 1; n <= 20; ++n) CHECK(std::abs(a(n) - b(n)) <= 1e-15);
  for (int n = 1; n <= 20; ++n) {
    const ModeVector w = inverse_laplacian(ModeVector::unit(20, n));
    CHECK(w(n) == 1.0 / mode_eigenvalue(n));
  }
  CHECK_THROWS_AS(semigroup_apply(-1.0, v), ConfigError);
}

TEST_CASE("projection and evaluation") {
  const UnitQuadrature q(4);
  const ModeVector c = ModeVector::project([](double u) { return sine_mode(3, u) + 0.5 * sine_mode(5, u); }, 8, q);
  for (int n = 1; n <= 8; ++n) CHECK(c(n) == doctest::Approx(n == 3 ? 1.0 : n == 5 ? 0.5 : 0.0).epsilon(1e-12));
  CHECK(c.evaluate(0.3) == doctest::Approx(sine_mode(3, 0.3) + 0.5 * sine_mode(5, 0.3)));
  CHECK(c.l2_norm() == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("sobolev norms weight by eigenvalue powers") {
  ModeVector v = ModeVector::unit(4, 2);
  CHECK(sobolev_norm(v, 1.0, 1) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(sobolev_norm(v, 1.0, -1) == doctest::Approx(0.5 / std::numbers::pi));
  CHECK(sobolev_norm(v, 2.0, 1) == doctest::Approx(mode_eigenvalue(2)));
}

TEST_CASE("dirichlet kernel") {
  CHECK(kernel_bilinear([](double) { return 1.0; }, [](double) { return 1.0; }, UnitQuadrature(2)) ==
        doctest::Approx(1.0 / 12.0).epsilon(1e-13));
  // int int e_n K e_m = delta_nm / (n pi)^2
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= 4; ++m) {
      const double v = kernel_bilinear([n](double u) { return sine_mode(n, u); },
                                       [m](double u) { return sine_mode(m, u); }, UnitQuadrature(4));
      CHECK(v == doctest::Approx(n == m ? 1.0 / mode_eigenvalue(n) : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("cosine moments match quadrature") {
  for (int p = 0; p <= 2; ++p)
    for (int m = 0; m <= 9; ++m) {
      const double ref = adaptive([p, m](double u) { return std::pow(u, p) * std::cos(m * pi * u); });
      CHECK(cosine_moment(p, m) == doctest::Approx(ref).epsilon(1e-13));
    }
  CHECK(cosine_moment(1, 3) == doctest::Approx(-2.0 / (9.0 * pi * pi)));
  CHECK(cosine_moment(2, 2) == doctest::Approx(2.0 / (4.0 * pi * pi)));
}

TEST_CASE("stationary covariance closed form") {
  const auto bp = BoundaryParams::make(0.0, 1.0);
  CHECK(stationary_covariance(1, 1, bp) == doctest::Approx(1.0 / 6.0 - 1.0 / (2.0 * pi * pi)).epsilon(1e-14));
  for (auto p : {BoundaryParams::make(0.1, 0.9), BoundaryParams::make(0.6, 0.2), BoundaryParams::make(1.0, 0.0)})
    for (int j = 1; j <= 6; ++j)
      for (int k = 1; k <= 6; ++k) {
        CHECK(std::abs(stationary_covariance(j, k, p) - stationary_covariance_quadrature(j, k, p)) < 1e-10);
        CHECK(stationary_covariance(j, k, p) == stationary_covariance(k, j, p));
        const double g = adaptive([&](double u) {
          const double r = p.alpha + (p.beta - p.alpha) * u;
          return chi(r) * sine_mode_derivative(j, u) * sine_mode_derivative(k, u);
        });
        CHECK(stationary_gradient_moment(j, k, p) == doctest::Approx(g).epsilon(1e-11).scale(1.0));
      }
  const auto eq = BoundaryParams::make(0.3, 0.3);
  for (int j = 1; j <= 5; ++j)
    for (int k = 1; k <= 5; ++k)
      CHECK(stationary_covariance(j, k, eq) == doctest::Approx(j == k ? 0.21 : 0.0).epsilon(1e-14).scale(1.0));
}

TEST_CASE("continuum profile") {
  const auto bp = BoundaryParams::make(0.1, 0.9);
  const auto st = ContinuumProfile::stationary(bp);
  CHECK(st.density(0.3, 0.25) == doctest::Approx(0.3));
  auto gamma = [](double u) { return 0.1 + 0.8 * u * u; };
  const auto cp = ContinuumProfile::from_function(bp, gamma);
  CHECK(cp.density(0.0, 0.4) == doctest::Approx(gamma(0.4)));
  CHECK(cp.density(1e-3, 0.4) == doctest::Approx(gamma(0.4)).epsilon(1e-2));
  CHECK(cp.density(3.0, 0.4) == doctest::Approx(0.1 + 0.8 * 0.4).epsilon(1e-12));
  CHECK(cp.truncation_tail() < 1e-3);
}

TEST_CASE("dynamic covariance limits") {
  const auto bp = BoundaryParams::make(0.1, 0.9);
  auto gamma = [](double u) { return 0.1 + 0.8 * u * u; };
  const auto cp = ContinuumProfile::from_function(bp, gamma);
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k) {
      const double ref = adaptive([&](double u) { return chi(gamma(u)) * sine_mode(j, u) * sine_mode(k, u); });
      CHECK(dynamic_covariance(0.0, 0.0, j, k, cp).total() == doctest::Approx(ref).epsilon(1e-12));
    }
  // Started from the linear product measure the field relaxes to the stationary covariance.
  const auto lin = ContinuumProfile::from_function(bp, [&](double u) { return bp.alpha + (bp.beta - bp.alpha) * u; });
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k)
      CHECK(dynamic_covariance(2.0, 2.0, j, k, lin).total() ==
            doctest::Approx(stationary_covariance(j, k, bp)).epsilon(1e-8).scale(1.0));
}

TEST_CASE("equilibrium dynamic covariance decays with the semigroup") {
  const auto bp = BoundaryParams::make(0.3, 0.3);
  const auto cp = ContinuumProfile::from_function(bp, [](double) { return 0.3; });
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k) {
      const double t = 0.07, s = 0.03;
      const double expect = j == k ? 0.21 * std::exp(-mode_eigenvalue(j) * (t - s)) : 0.0;
      CHECK(dynamic_covariance(t, s, j, k, cp).total() == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("matrix form of the dynamic covariance is symmetric") {
  const auto bp = BoundaryParams::make(0.2, 0.7);
  const auto cp = ContinuumProfile::from_function(bp, [](double u) { return 0.2 + 0.5 * std::sqrt(u); });
  const Eigen::MatrixXd m = dynamic_covariance_matrix(0.05, 3, cp);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(dynamic_covariance(0.1, 0.2, 1, 1, cp), ConfigError);
}
