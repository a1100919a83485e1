#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/exact_oracle.hpp"
#include "ssep/experiments.hpp"

using namespace ssep;

TEST_CASE("generator rows sum to zero and match the direct formula") {
  const auto bp = BoundaryParams::make(0.2, 0.65);
  const auto g = build_generator_dense(6, bp);
  CHECK(g.states() == 32);
  for (Eigen::Index s = 0; s < g.q.rows(); ++s) CHECK(std::abs(g.q.row(s).sum()) < 1e-14);
  std::vector<double> f(g.states());
  for (std::size_t s = 0; s < f.size(); ++s) f[s] = std::sin(1.7 * static_cast<double>(s)) + 0.1 * static_cast<double>(s);
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXd qf = g.q * fv;
  for (std::size_t s = 0; s < f.size(); ++s)
    CHECK(apply_generator(6, bp, f, s) == doctest::Approx(qf(static_cast<Eigen::Index>(s))).epsilon(1e-13));
}

TEST_CASE("stationary distribution is a probability vector with small residual") {
  const auto sd = stationary_distribution(build_generator_dense(9, BoundaryParams::make(0.1, 0.9)));
  CHECK(sd.probs.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sd.probs.minCoeff() >= 0.0);
  CHECK(sd.residual < 1e-12);
}

TEST_CASE("equal reservoirs give the product measure") {
  for (double g : {0.0, 0.3, 0.5, 1.0}) {
    const auto sd = stationary_distribution(build_generator_dense(7, BoundaryParams::make(g, g)));
    CHECK((sd.probs - product_measure(7, g)).cwiseAbs().maxCoeff() < 1e-12);
    const TriangleField tp = exact_two_point(sd);
    CHECK(tp.sup_norm() < 1e-12);
  }
}

TEST_CASE("stationary profile is the linear interpolation") {
  for (int n : {2, 5, 10})
    for (double a : {0.0, 0.25, 1.0})
      for (double b : {0.0, 0.75, 1.0}) CHECK(exact_check(n, BoundaryParams::make(a, b)).profile_error < 1e-12);
}

TEST_CASE("two-point function of the smallest chain") {
  const ExactCheck c = exact_check(3, BoundaryParams::make(0.0, 1.0));
  const auto sd = stationary_distribution(build_generator_dense(3, BoundaryParams::make(0.0, 1.0)));
  CHECK(std::abs(std::abs(exact_two_point(sd).at(1, 2)) - 1.0 / 18.0) < 1e-10);
  CHECK(c.sign == -1);
}

TEST_CASE("the sign of the correlations is uniform over a parameter sweep") {
  int sigma = 0;
  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (double b : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const ExactCheck c = exact_check(12, BoundaryParams::make(a, b));
      CHECK(c.sign_uniform);
      CHECK(c.signed_error < 1e-10);
      if (a == b) {
        CHECK(c.sign == 0);
        continue;
      }
      if (sigma == 0) sigma = c.sign;
      CHECK(c.sign == sigma);
    }
  CHECK(sigma == -1);
}

TEST_CASE("distribution csv has a fixed header and one row per state") {
  const auto sd = stationary_distribution(build_generator_dense(4, BoundaryParams::make(0.2, 0.4)));
  std::ostringstream os;
  write_distribution_csv(os, sd);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "state_bits,probability");
  int rows = 0;
  double total = 0.0;
  while (std::getline(in, line)) {
    const auto cells = split_csv_line(line);
    REQUIRE(cells.size() == 2);
    CHECK(std::stoi(cells[0]) == rows);
    total += std::stod(cells[1]);
    ++rows;
  }
  CHECK(rows == 8);
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("oversized chains are rejected") {
  CHECK_THROWS_AS(build_generator_dense(kExactMaxN + 1, BoundaryParams::make(0.5, 0.5)), CapacityError);
}
