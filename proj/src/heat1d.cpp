#include "ssep/heat1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssep/errors.hpp"

namespace ssep {

std::vector<double> laplacian_1d(const Profile1D& p) {
  const int n = p.n();
  const double n2 = static_cast<double>(n) * n;
  std::vector<double> out(static_cast<std::size_t>(n - 1));
  for (int x = 1; x < n; ++x) out[static_cast<std::size_t>(x - 1)] = n2 * (p[x + 1] + p[x - 1] - 2.0 * p[x]);
  return out;
}

HeatSolver1D::HeatSolver1D(const Profile1D& p0)
    : n_(p0.n()), linear_(Profile1D::linear(p0.n(), p0.boundary())) {
  const int m = n_ - 1;
  const double pi = std::numbers::pi;
  sines_.resize(static_cast<std::size_t>(m) * m);
  amps_.assign(static_cast<std::size_t>(m), 0.0);
  rates_.resize(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    const double s = std::sin(k * pi / (2.0 * n_));
    rates_[k - 1] = 4.0 * n_ * static_cast<double>(n_) * s * s;
    double a = 0.0;
    for (int x = 1; x <= m; ++x) {
      const double phi = std::sin(k * pi * x / n_);
      sines_[static_cast<std::size_t>(k - 1) * m + (x - 1)] = phi;
      a += (p0[x] - linear_[x]) * phi;
    }
    // sum_x sin^2(k pi x / N) = N / 2
    amps_[k - 1] = 2.0 * a / n_;
  }
}

Profile1D HeatSolver1D::at(double tau) const {
  if (!(tau >= 0.0)) throw ConfigError("heat evolution time must be nonnegative");
  const int m = n_ - 1;
  std::vector<double> interior(linear_.interior().begin(), linear_.interior().end());
  for (int k = 1; k <= m; ++k) {
    const double c = amps_[k - 1] * std::exp(-rates_[k - 1] * tau);
    if (c == 0.0) continue;
    const double* row = &sines_[static_cast<std::size_t>(k - 1) * m];
    for (int x = 0; x < m; ++x) interior[x] += c * row[x];
  }
  return Profile1D(n_, linear_.boundary(), interior);
}

Profile1D HeatSolver1D::integral(double tau) const {
  if (!(tau >= 0.0)) throw ConfigError("heat evolution time must be nonnegative");
  const int m = n_ - 1;
  std::vector<double> interior(static_cast<std::size_t>(m));
  for (int x = 0; x < m; ++x) interior[x] = tau * linear_[x + 1];
  for (int k = 1; k <= m; ++k) {
    const double c = amps_[k - 1] * (-std::expm1(-rates_[k - 1] * tau)) / rates_[k - 1];
    const double* row = &sines_[static_cast<std::size_t>(k - 1) * m];
    for (int x = 0; x < m; ++x) interior[x] += c * row[x];
  }
  BoundaryParams ends{tau * linear_.boundary().alpha, tau * linear_.boundary().beta};
  return Profile1D(n_, ends, interior);
}

Profile1D solve_heat_1d(const Profile1D& p0, double tau) { return HeatSolver1D(p0).at(tau); }

GradientReport gradient_maxprinciple_check(const Profile1D& p0, std::span<const double> taus, double tolerance) {
  GradientReport report;
  report.initial_max = p0.max_gradient();
  HeatSolver1D heat(p0);
  const int n = p0.n();
  for (double tau : taus) {
    const Profile1D p = heat.at(tau);
    for (int x = 0; x < n; ++x) {
      const double g = n * std::abs(p[x + 1] - p[x]);
      report.observed_max = std::max(report.observed_max, g);
      if (g > report.initial_max + tolerance && !report.witness) {
        report.holds = false;
        report.witness = GradientWitness{tau, x, g};
      }
    }
  }
  return report;
}

}  // namespace ssep
