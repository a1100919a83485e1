#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ssep/errors.hpp"
#include "ssep/ou_galerkin.hpp"
#include "ssep/spectral.hpp"

using namespace ssep;

namespace {

Eigen::VectorXd lambdas(int modes) {
  Eigen::VectorXd l(modes);
  for (int j = 1; j <= modes; ++j) l(j - 1) = mode_eigenvalue(j);
  return l;
}

}  // namespace

TEST_CASE("equal reservoirs give a diagonal noise covariance") {
  const auto cp = ContinuumProfile::stationary(BoundaryParams::make(0.3, 0.3));
  const Eigen::MatrixXd b = noise_covariance(6, cp, 0.0);
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k < 6; ++k)
      CHECK(std::abs(b(j, k) - (j == k ? 2.0 * 0.21 * mode_eigenvalue(j + 1) : 0.0)) < 1e-10 * b(j, j));
}

TEST_CASE("noise covariance is symmetric and relaxes to the stationary one") {
  const auto bp = BoundaryParams::make(0.1, 0.9);
  const auto cp = ContinuumProfile::from_function(bp, [](double u) { return 0.5 + 0.4 * std::cos(5.0 * u); });
  const Eigen::MatrixXd b0 = noise_covariance(5, cp, 0.01);
  CHECK((b0 - b0.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd late = noise_covariance(5, cp, 3.0);
  const Eigen::MatrixXd stat = noise_covariance(5, ContinuumProfile::stationary(bp), 0.0);
  CHECK((late - stat).cwiseAbs().maxCoeff() < 1e-9 * stat.cwiseAbs().maxCoeff());
}

TEST_CASE("Lyapunov solution: identity, residual and closed form") {
  const auto bp = BoundaryParams::make(0.1, 0.9);
  const Eigen::MatrixXd b = noise_covariance(16, ContinuumProfile::stationary(bp), 0.0);
  const Eigen::MatrixXd s = lyapunov_stationary(b);
  CHECK(lyapunov_residual(s, b) <= 1e-12 * b.cwiseAbs().maxCoeff());
  CHECK((s - stationary_covariance_matrix(16, bp)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd si = lyapunov_stationary(id);
  for (int j = 0; j < 3; ++j) CHECK(si(j, j) == doctest::Approx(1.0 / (2.0 * mode_eigenvalue(j + 1))));
  CHECK(si(0, 1) == 0.0);
}

TEST_CASE("Euler stationary covariance tends to the Lyapunov solution") {
  const Eigen::MatrixXd b = noise_covariance(4, ContinuumProfile::stationary(BoundaryParams::make(0.0, 1.0)), 0.0);
  const Eigen::MatrixXd s = lyapunov_stationary(b);
  double prev = INFINITY;
  for (double dt : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
    const double err = (euler_stationary_covariance(b, dt) - s).cwiseAbs().maxCoeff();
    if (std::isfinite(prev)) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("symmetric square root") {
  Eigen::Matrix3d m;
  m << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0;
  const Eigen::MatrixXd r = symmetric_sqrt(m);
  CHECK((r * r - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::Matrix2d bad;
  bad << 1.0, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(symmetric_sqrt(bad), NumericalError);
}

TEST_CASE("step size control") {
  OuSpec s;
  s.modes = 8;
  s.dt = 1.0;
  s.t_final = 1.0;
  const double dt = ou_step_size(s);
  CHECK(dt * mode_eigenvalue(8) <= 0.1 + 1e-12);
  CHECK(std::abs(s.t_final / dt - std::round(s.t_final / dt)) < 1e-9);
  s.auto_shrink = false;
  s.dt = 0.3;
  CHECK(ou_step_size(s) == doctest::Approx(0.25));
}

TEST_CASE("zero noise gives pure exponential decay") {
  const auto cp = ContinuumProfile::stationary(BoundaryParams::make(0.0, 0.0));
  OuSpec s;
  s.modes = 3;
  s.dt = 1e-3;
  s.t_final = 0.05;
  s.start = OuStart::Given;
  s.y0 = Eigen::Vector3d(1.0, -2.0, 0.5);
  s.stepper = OuStepper::Exact;
  s.record_stride = 50;
  const auto run = simulate_ou(s, cp);
  const Eigen::VectorXd lam = lambdas(3);
  const Eigen::Index last = run.states.rows() - 1;
  for (int j = 0; j < 3; ++j)
    CHECK(run.states(last, j) == doctest::Approx(s.y0(j) * std::exp(-lam(j) * 0.05)).epsilon(1e-12));
  s.stepper = OuStepper::EulerMaruyama;
  const auto em = simulate_ou(s, cp);
  for (int j = 0; j < 3; ++j) {
    const double steps = 0.05 / em.dt;
    CHECK(em.states(em.states.rows() - 1, j) == doctest::Approx(s.y0(j) * std::pow(1.0 - lam(j) * em.dt, steps)).epsilon(1e-10));
  }
}

TEST_CASE("runs are deterministic") {
  const auto cp = ContinuumProfile::stationary(BoundaryParams::make(0.2, 0.6));
  OuSpec s;
  s.modes = 4;
  s.t_final = 0.1;
  s.seed = 3;
  s.record_stride = 10;
  const auto a = simulate_ou(s, cp);
  const auto b = simulate_ou(s, cp);
  CHECK(a.states == b.states);
  s.seed = 4;
  CHECK(simulate_ou(s, cp).states != a.states);
}

TEST_CASE("long runs reproduce the stationary covariance") {
  const auto bp = BoundaryParams::make(0.1, 0.9);
  const auto cp = ContinuumProfile::stationary(bp);
  const Eigen::MatrixXd target = stationary_covariance_matrix(3, bp);
  for (auto stepper : {OuStepper::EulerMaruyama, OuStepper::Exact}) {
    OuSpec s;
    s.modes = 3;
    s.dt = 1e-3;
    s.t_final = 200.0;
    s.burn_in = 1.0;
    s.seed = 17;
    s.stepper = stepper;
    s.start = OuStart::Stationary;
    const double dt = ou_step_size(s);
    BatchCovariance bc(3, static_cast<std::uint64_t>(std::llround(1.0 / dt)));
    simulate_ou(s, cp, [&](double, const Eigen::VectorXd& y) { bc.add(y); });
    const auto est = bc.estimate();
    const Eigen::MatrixXd expect =
        stepper == OuStepper::Exact ? target : euler_stationary_covariance(noise_covariance(3, cp, 0.0), dt);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(std::abs(est.cov(j, k) - expect(j, k)) < 4.0 * est.se(j, k));
  }
}

TEST_CASE("time-dependent noise from a zero start matches the limiting covariance") {
  const auto bp = BoundaryParams::make(0.0, 1.0);
  const auto cp = ContinuumProfile::from_function(bp, [](double u) { return u * u; });
  const int reps = 2000;
  const double t = 0.05;
  Eigen::MatrixXd y(reps, 2);
  for (int r = 0; r < reps; ++r) {
    OuSpec s;
    s.modes = 2;
    s.dt = 1e-4;
    s.t_final = t;
    s.seed = 1000 + static_cast<std::uint64_t>(r);
    Eigen::VectorXd last;
    simulate_ou(s, cp, [&](double, const Eigen::VectorXd& v) { last = v; });
    y.row(r) = last.transpose();
  }
  const auto est = estimate_covariance(y);
  for (int j = 1; j <= 2; ++j)
    for (int k = j; k <= 2; ++k) {
      const double expect = dynamic_covariance(t, t, j, k, cp).noise;
      CHECK(std::abs(est.cov(j - 1, k - 1) - expect) < 4.0 * est.se(j - 1, k - 1));
    }
}

TEST_CASE("batch covariance") {
  BatchCovariance bc(2, 2);
  bc.add(Eigen::Vector2d(1.0, 0.0));
  bc.add(Eigen::Vector2d(1.0, 2.0));
  bc.add(Eigen::Vector2d(0.0, 1.0));
  bc.add(Eigen::Vector2d(2.0, 1.0));
  bc.add(Eigen::Vector2d(5.0, 5.0));
  CHECK(bc.batches() == 2);
  const auto e = bc.estimate();
  CHECK(e.cov(0, 0) == doctest::Approx(1.5));
  CHECK(e.cov(1, 1) == doctest::Approx(1.5));
  CHECK(e.cov(0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(BatchCovariance(2, 0), ConfigError);
}

TEST_CASE("trajectory CSV schema and validation") {
  const auto cp = ContinuumProfile::stationary(BoundaryParams::make(0.5, 0.5));
  OuSpec s;
  s.modes = 2;
  s.t_final = 0.01;
  s.dt = 0.005;
  s.record_stride = 1;
  std::ostringstream os;
  write_trajectory_csv(os, simulate_ou(s, cp));
  CHECK(os.str().rfind("t,j,value\n", 0) == 0);
  s.start = OuStart::Given;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.start = OuStart::Zero;
  s.burn_in = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  OuSpec e;
  e.stepper = OuStepper::Exact;
  CHECK_THROWS_AS(simulate_ou(e, ContinuumProfile::from_function(BoundaryParams::make(0.0, 1.0), [](double u) { return u; })),
                  ConfigError);
}
