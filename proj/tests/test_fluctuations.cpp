#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ssep/errors.hpp"
#include "ssep/fluctuations.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/rng.hpp"
#include "ssep/spectral.hpp"

using namespace ssep;

TEST_CASE("projection of a hand example") {
  const auto bp = BoundaryParams::make(0.0, 1.0);
  const FieldSample s = project_field(LatticeConfig(4, {1, 0, 0}), Profile1D::linear(4, bp), 2);
  CHECK(s.y[0] == doctest::Approx(-std::numbers::sqrt2 / 4.0).epsilon(1e-12));
}

TEST_CASE("projection vanishes when the centring equals the configuration") {
  const auto bp = BoundaryParams::make(0.5, 0.5);
  const std::vector<double> vals{1, 0, 0, 1, 1};
  const Profile1D c(6, bp, vals);
  const FieldSample s = project_field(LatticeConfig(6, {1, 0, 0, 1, 1}), c, 3);
  for (double v : s.y) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("projection agrees with a direct evaluation and obeys the crude bound") {
  RandomStream rng(3, 0);
  const int n = 37;
  const auto bp = BoundaryParams::make(0.2, 0.7);
  const Profile1D c = Profile1D::linear(n, bp);
  for (int trial = 0; trial < 20; ++trial) {
    const LatticeConfig cfg = sample_product(c, rng);
    const FieldSample s = project_field(cfg, c, 5);
    for (int j = 1; j <= 5; ++j) {
      double direct = 0.0;
      for (int x = 1; x < n; ++x)
        direct += std::numbers::sqrt2 * std::sin(j * std::numbers::pi * x / n) * (cfg[x] - c[x]);
      CHECK(s.y[static_cast<std::size_t>(j - 1)] == doctest::Approx(direct / std::sqrt(double(n))).epsilon(1e-12));
      CHECK(std::abs(s.y[static_cast<std::size_t>(j - 1)]) <= std::numbers::sqrt2 * std::sqrt(double(n)));
    }
  }
}

TEST_CASE("ensemble spec validation") {
  EnsembleSpec s;
  s.replicas = 1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.replicas = 10;
  s.times = {0.2, 0.1};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.times = {0.1};
  s.modes = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.modes = 2;
  s.initial = InitialCondition::Product;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("ensembles are deterministic and independent of the worker count") {
  EnsembleSpec s;
  s.n = 24;
  s.bp = BoundaryParams::make(0.2, 0.8);
  s.replicas = 50;
  s.times = {0.0, 0.02, 0.05};
  s.burn_in = 0.1;
  s.seed = 77;
  s.modes = 3;
  s.record_pairs = true;
  const auto a = run_ensemble(s);
  s.workers = 3;
  const auto b = run_ensemble(s);
  for (std::size_t t = 0; t < a.samples.size(); ++t)
    for (std::size_t r = 0; r < a.samples[t].size(); ++r) CHECK(a.samples[t][r].y == b.samples[t][r].y);
  CHECK(a.occupied == b.occupied);
  CHECK(a.pairs == b.pairs);
  CHECK(a.events == b.events);
}

TEST_CASE("product start without evolution gives independent sites") {
  EnsembleSpec s;
  s.n = 40;
  s.bp = BoundaryParams::make(0.3, 0.3);
  s.initial = InitialCondition::Product;
  s.gamma = [](double) { return 0.3; };
  s.replicas = 5000;
  s.times = {0.0};
  s.seed = 5;
  s.modes = 3;
  const auto res = run_ensemble(s);
  const auto est = estimate_covariance(res.mode_matrix(0));
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(est.mean(j)) < 4.0 * std::sqrt(est.cov(j, j) / 5000.0));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(est.cov(j, k) - (j == k ? 0.21 : 0.0)) < 4.0 * est.se(j, k));
  }
}

TEST_CASE("equilibrium stationary variance and vanishing cross terms") {
  EnsembleSpec s;
  s.n = 32;
  s.bp = BoundaryParams::make(0.5, 0.5);
  s.replicas = 4000;
  s.burn_in = 0.2;
  s.seed = 13;
  s.modes = 4;
  const auto est = estimate_covariance(run_ensemble(s).mode_matrix(0));
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) CHECK(std::abs(est.cov(j, k) - (j == k ? 0.25 : 0.0)) < 4.0 * est.se(j, k));
}

TEST_CASE("doubling the burn-in leaves the stationary covariance unchanged") {
  EnsembleSpec s;
  s.n = 32;
  s.bp = BoundaryParams::make(0.1, 0.9);
  s.replicas = 4000;
  s.burn_in = 0.5;
  s.seed = 100;
  s.modes = 3;
  const auto a = estimate_covariance(run_ensemble(s).mode_matrix(0));
  s.burn_in = 1.0;
  s.seed = 101;
  const auto b = estimate_covariance(run_ensemble(s).mode_matrix(0));
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(a.cov(j, k) - b.cov(j, k)) < 4.0 * std::hypot(a.se(j, k), b.se(j, k)));
}

TEST_CASE("empirical density follows the discrete heat equation") {
  EnsembleSpec s;
  s.n = 32;
  s.bp = BoundaryParams::make(0.0, 1.0);
  s.initial = InitialCondition::Product;
  s.gamma = [](double u) { return u * u * u; };
  s.replicas = 4000;
  s.times = {0.01, 0.05, 0.2};
  s.seed = 8;
  s.modes = 1;
  const auto res = run_ensemble(s);
  const HeatSolver1D heat(Profile1D::from_function(32, s.bp, s.gamma));
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    const auto m = res.mean_density(t);
    const auto se = res.mean_density_se(t);
    const Profile1D rho = heat.at(s.times[t]);
    for (int x = 1; x < 32; ++x) CHECK(std::abs(m[x - 1] - rho[x]) <= 4.0 * se[x - 1] + 1e-12);
  }
}

TEST_CASE("stationary time correlation decays with the semigroup factor") {
  EnsembleSpec s;
  s.n = 48;
  s.bp = BoundaryParams::make(0.5, 0.5);
  s.replicas = 6000;
  s.times = {0.0, 0.05};
  s.burn_in = 0.1;
  s.seed = 31;
  s.modes = 2;
  const auto res = run_ensemble(s);
  for (int j = 1; j <= 2; ++j) {
    Eigen::MatrixXd pair(s.replicas, 2);
    for (int r = 0; r < s.replicas; ++r) {
      pair(r, 0) = res.samples[0][static_cast<std::size_t>(r)].y[static_cast<std::size_t>(j - 1)];
      pair(r, 1) = res.samples[1][static_cast<std::size_t>(r)].y[static_cast<std::size_t>(j - 1)];
    }
    const auto est = estimate_covariance(pair);
    CHECK(std::abs(est.cov(0, 1) - 0.25 * std::exp(-mode_eigenvalue(j) * 0.05)) < 4.0 * est.se(0, 1));
  }
}

TEST_CASE("single-chain mode runs and is deterministic") {
  EnsembleSpec s;
  s.n = 16;
  s.bp = BoundaryParams::make(0.5, 0.5);
  s.replicas = 200;
  s.times = {0.05};
  s.burn_in = 0.1;
  s.seed = 4;
  s.modes = 2;
  s.single_chain = true;
  const auto a = run_ensemble(s);
  const auto b = run_ensemble(s);
  CHECK(a.samples[0].back().y == b.samples[0].back().y);
  CHECK(a.samples[0][3].time == doctest::Approx(0.15));
  s.times = {0.0};
  CHECK_THROWS_AS(run_ensemble(s), ConfigError);
}

TEST_CASE("covariance estimator: definitions and degenerate input") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(10, 3, 2.5);
  const auto z = estimate_covariance(c);
  CHECK(z.cov.cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd two(2, 2);
  two << 1.0, 4.0, 3.0, -2.0;
  const auto e = estimate_covariance(two);
  const Eigen::RowVector2d m(2.0, 1.0);
  const Eigen::MatrixXd d = two.rowwise() - m;
  const Eigen::MatrixXd expect = d.transpose() * d;
  CHECK((e.cov - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((e.cov - e.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(estimate_covariance(Eigen::MatrixXd(1, 2)), ConfigError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 1);
  bad(1, 0) = NAN;
  CHECK_THROWS_AS(estimate_covariance(bad), ConfigError);
}

TEST_CASE("covariance estimator on synthetic Gaussian data") {
  Eigen::Matrix3d sigma;
  sigma << 1.0, 0.3, -0.2, 0.3, 0.5, 0.1, -0.2, 0.1, 0.8;
  const Eigen::Matrix3d l = sigma.llt().matrixL();
  RandomStream rng(55, 1);
  const int n = 20000;
  Eigen::MatrixXd y(n, 3);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d xi(rng.normal(), rng.normal(), rng.normal());
    y.row(i) = (l * xi).transpose();
  }
  const auto est = estimate_covariance(y);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      CHECK(est.se(j, k) > 0.0);
      CHECK(std::abs(est.cov(j, k) - sigma(j, k)) < 4.0 * est.se(j, k));
    }
}

TEST_CASE("gaussianity check: calibration and power") {
  RandomStream rng(9, 2);
  Eigen::MatrixXd g(10000, 4), ex(10000, 1);
  for (int i = 0; i < 10000; ++i) {
    for (int j = 0; j < 4; ++j) g(i, j) = rng.normal();
    ex(i, 0) = rng.exponential(1.0);
  }
  CHECK_FALSE(gaussianity_check(g).any_flagged());
  const auto rep = gaussianity_check(ex);
  CHECK(rep.modes[0].flagged);
  CHECK(rep.modes[0].skewness == doctest::Approx(2.0).epsilon(0.2));
  CHECK_THROWS_AS(gaussianity_check(Eigen::MatrixXd::Zero(999, 1)), ConfigError);
}

TEST_CASE("sample dump schema") {
  EnsembleSpec s;
  s.n = 8;
  s.bp = BoundaryParams::make(0.5, 0.5);
  s.replicas = 3;
  s.times = {0.0, 0.1};
  s.burn_in = 0.0;
  s.seed = 1;
  s.modes = 2;
  std::ostringstream os;
  write_samples_csv(os, run_ensemble(s));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "replica,time,j,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 2 * 2);
}
