#include "ssep/exact_oracle.hpp"

#include <cmath>
#include <ostream>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/process.hpp"

namespace ssep {
namespace {

inline int site_bit(std::uint64_t s, int x) { return static_cast<int>((s >> (x - 1)) & 1u); }

}  // namespace

DenseGenerator build_generator_dense(int n, const BoundaryParams& bp) {
  if (n < 2) throw ConfigError("exact generator needs N >= 2");
  if (n > kExactMaxN) throw CapacityError("exact generator capped at N = " + std::to_string(kExactMaxN));
  const std::uint64_t states = std::uint64_t{1} << (n - 1);
  DenseGenerator g{n, bp, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states))};
  for (std::uint64_t s = 0; s < states; ++s) {
    const auto config = LatticeConfig::from_bits(n, s);
    double out = 0.0;
    for (const auto& [event, rate] : event_rates(config, bp)) {
      const auto target = apply_event(config, event).bits();
      g.q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(target)) += rate;
      out += rate;
    }
    g.q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) -= out;
  }
  return g;
}

double apply_generator(int n, const BoundaryParams& bp, std::span<const double> f, std::uint64_t s) {
  const double fs = f[s];
  double acc = 0.0;
  for (int x = 1; x <= n - 2; ++x) {
    const std::uint64_t mask = (std::uint64_t{1} << (x - 1)) | (std::uint64_t{1} << x);
    // sigma^{x,x+1}: exchanging equal bits is the identity.
    const std::uint64_t swapped = (site_bit(s, x) != site_bit(s, x + 1)) ? (s ^ mask) : s;
    acc += f[swapped] - fs;
  }
  const int e1 = site_bit(s, 1);
  acc += (bp.alpha * (1 - e1) + (1 - bp.alpha) * e1) * (f[s ^ 1u] - fs);
  const int el = site_bit(s, n - 1);
  acc += (bp.beta * (1 - el) + (1 - bp.beta) * el) * (f[s ^ (std::uint64_t{1} << (n - 2))] - fs);
  return acc;
}

StationaryDistribution stationary_distribution(const DenseGenerator& g) {
  const Eigen::Index m = g.q.rows();
  Eigen::MatrixXd a = g.q.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  a.row(m - 1).setOnes();
  rhs(m - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd p = lu.solve(rhs);
  if (!p.allFinite()) throw NumericalError("stationary solve produced non-finite values", INFINITY);

  // Transient states of a reducible chain come out as round-off around zero.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p(i) < 0.0) {
      if (p(i) < -1e-10) throw NumericalError("stationary vector has a negative entry", p(i));
      p(i) = 0.0;
    }
  }
  p /= p.sum();
  const double residual = (p.transpose() * g.q).cwiseAbs().maxCoeff();
  if (residual > 1e-10) throw NumericalError("stationary vector fails nu Q = 0", residual);
  return {g.n, g.bp, std::move(p), residual};
}

Profile1D exact_profile(const StationaryDistribution& sd) {
  const int n = sd.n;
  std::vector<double> mean(static_cast<std::size_t>(n - 1), 0.0);
  for (Eigen::Index s = 0; s < sd.probs.size(); ++s) {
    const double p = sd.probs(s);
    for (int x = 1; x < n; ++x)
      if (site_bit(static_cast<std::uint64_t>(s), x)) mean[static_cast<std::size_t>(x - 1)] += p;
  }
  return Profile1D(n, sd.bp, mean);
}

TriangleField exact_two_point(const StationaryDistribution& sd) {
  const int n = sd.n;
  const Profile1D rho = exact_profile(sd);
  TriangleField out(n);
  std::vector<double> joint(out.interior_size(), 0.0);
  for (Eigen::Index s = 0; s < sd.probs.size(); ++s) {
    const double p = sd.probs(s);
    if (p == 0.0) continue;
    const auto bits = static_cast<std::uint64_t>(s);
    for (int x = 1; x <= n - 2; ++x) {
      if (!site_bit(bits, x)) continue;
      for (int y = x + 1; y <= n - 1; ++y)
        if (site_bit(bits, y)) joint[out.index(x, y)] += p;
    }
  }
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y) out.set(x, y, joint[out.index(x, y)] - rho[x] * rho[y]);
  return out;
}

Eigen::VectorXd product_measure(int n, double gamma) {
  const std::uint64_t states = std::uint64_t{1} << (n - 1);
  Eigen::VectorXd p(static_cast<Eigen::Index>(states));
  for (std::uint64_t s = 0; s < states; ++s) {
    double v = 1.0;
    for (int x = 1; x < n; ++x) v *= site_bit(s, x) ? gamma : 1.0 - gamma;
    p(static_cast<Eigen::Index>(s)) = v;
  }
  return p;
}

void write_distribution_csv(std::ostream& os, const StationaryDistribution& sd) {
  CsvWriter w(os, {"state_bits", "probability"});
  for (Eigen::Index s = 0; s < sd.probs.size(); ++s) w.row(static_cast<long long>(s), sd.probs(s));
}

}  // namespace ssep
