#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ssep/lattice_fields.hpp"

namespace ssep {

/// (Delta_N rho)(x) = N^2 [rho(x+1) + rho(x-1) - 2 rho(x)] for x = 1..N-1
/// (index x-1 in the result); the clamped ends enter at x = 1 and x = N-1.
std::vector<double> laplacian_1d(const Profile1D& p);

/// Exact solution of d/ds rho = Delta_N rho with clamped ends.
///
/// The deviation from the linear profile is expanded in the discrete sine
/// modes phi_k(x) = sin(k pi x / N), k = 1..N-1, each decaying at
/// mu_k = 4 N^2 sin^2(k pi / 2N). No time stepping is involved.
class HeatSolver1D {
 public:
  explicit HeatSolver1D(const Profile1D& p0);

  int n() const noexcept { return n_; }
  Profile1D at(double tau) const;

  /// integral_0^tau rho_s(x) ds for every site (the ends integrate to tau*alpha, tau*beta).
  Profile1D integral(double tau) const;

  double mode_rate(int k) const { return rates_[static_cast<std::size_t>(k - 1)]; }
  double mode_amplitude(int k) const { return amps_[static_cast<std::size_t>(k - 1)]; }
  const Profile1D& stationary() const noexcept { return linear_; }

 private:
  int n_;
  Profile1D linear_;
  std::vector<double> amps_;   // coefficient of phi_k in rho_0 - linear
  std::vector<double> rates_;  // mu_k
  std::vector<double> sines_;  // sin(k pi x / N), row k-1, column x-1
};

Profile1D solve_heat_1d(const Profile1D& p0, double tau);

struct GradientWitness {
  double tau;
  int x;
  double value;
};

struct GradientReport {
  bool holds = true;
  double initial_max = 0.0;
  double observed_max = 0.0;
  std::optional<GradientWitness> witness;  ///< first violation, if any
};

/// Checks sup_tau max_x |grad_N rho_tau(x)| <= max_x |grad_N rho_0(x)| + tolerance,
/// gradients including rho(1) - alpha and beta - rho(N-1).
GradientReport gradient_maxprinciple_check(const Profile1D& p0, std::span<const double> taus,
                                           double tolerance = 1e-9);

}  // namespace ssep
