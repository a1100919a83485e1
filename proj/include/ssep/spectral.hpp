#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "ssep/lattice_fields.hpp"

namespace ssep {

inline double chi(double rho) { return rho * (1.0 - rho); }

/// lambda_n = (n pi)^2
inline double mode_eigenvalue(int n) {
  const double a = n * std::numbers::pi;
  return a * a;
}

/// e_n(u) = sqrt(2) sin(n pi u)
inline double sine_mode(int n, double u) { return std::numbers::sqrt2 * std::sin(n * std::numbers::pi * u); }

/// e_n'(u) = sqrt(2) n pi cos(n pi u)
inline double sine_mode_derivative(int n, double u) {
  return std::numbers::sqrt2 * n * std::numbers::pi * std::cos(n * std::numbers::pi * u);
}

/// Composite Gauss-Legendre rule on [0,1]: `panels` equal panels of 64 nodes each.
class UnitQuadrature {
 public:
  explicit UnitQuadrature(int panels = 1);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// First J Dirichlet eigenpairs of -d^2/du^2 on [0,1].
class SineBasis {
 public:
  explicit SineBasis(int j_max);

  int size() const noexcept { return j_max_; }
  double eigenvalue(int n) const { return mode_eigenvalue(n); }
  double operator()(int n, double u) const { return sine_mode(n, u); }
  double derivative(int n, double u) const { return sine_mode_derivative(n, u); }

  /// Quadrature Gram matrix G_jk = int e_j e_k (identity up to round-off).
  Eigen::MatrixXd gram(const UnitQuadrature& q) const;

 private:
  int j_max_;
};

/// Coefficients c_1..c_J in the e_n basis; c(n) is 1-based.
struct ModeVector {
  std::vector<double> coeffs;

  ModeVector() = default;
  explicit ModeVector(int j) : coeffs(static_cast<std::size_t>(j), 0.0) {}
  static ModeVector unit(int j, int n);
  /// <f, e_n> for n = 1..J by quadrature.
  static ModeVector project(const std::function<double(double)>& f, int j, const UnitQuadrature& q);

  int size() const noexcept { return static_cast<int>(coeffs.size()); }
  double& operator()(int n) { return coeffs[static_cast<std::size_t>(n - 1)]; }
  double operator()(int n) const { return coeffs[static_cast<std::size_t>(n - 1)]; }
  double evaluate(double u) const;
  double l2_norm() const;
};

/// T_t: c_n -> exp(-(n pi)^2 t) c_n.
ModeVector semigroup_apply(double t, const ModeVector& v);

/// (-Delta)^{-1}: c_n -> c_n / (n pi)^2.
ModeVector inverse_laplacian(const ModeVector& v);

/// Green kernel of -d^2/du^2 with Dirichlet ends: u(1 - v) for u <= v, symmetric.
inline double dirichlet_kernel(double u, double v) { return u <= v ? u * (1.0 - v) : v * (1.0 - u); }

/// int int f(u) K(u,v) g(v) du dv by a tensor-product rule.
double kernel_bilinear(const std::function<double(double)>& f, const std::function<double(double)>& g,
                       const UnitQuadrature& q);

/// (sum_n (n pi)^{±2k} c_n^2)^{1/2}; sign > 0 gives H_k, sign < 0 gives H_{-k}.
double sobolev_norm(const ModeVector& v, double k, int sign);

/// chi(rho_bar(u)) = a + b u + c u^2 for the linear profile between alpha and beta.
struct ChiQuadratic {
  double a, b, c;
  static ChiQuadratic of(const BoundaryParams& bp);
  double operator()(double u) const { return a + u * (b + u * c); }
};

/// int_0^1 u^p cos(m pi u) du for p = 0, 1, 2 and integer m >= 0.
double cosine_moment(int p, int m);

/// int chi(rho_bar) e_j e_k in closed form.
double stationary_chi_moment(int j, int k, const BoundaryParams& bp);

/// int chi(rho_bar) e_j' e_k' in closed form.
double stationary_gradient_moment(int j, int k, const BoundaryParams& bp);

/// Covariance of the stationary Gaussian field on (e_j, e_k):
/// int chi(rho_bar) e_j e_k - (beta - alpha)^2 delta_jk / (j pi)^2.
double stationary_covariance(int j, int k, const BoundaryParams& bp);

/// Same quantity with both terms computed by quadrature (kernel form for the second).
double stationary_covariance_quadrature(int j, int k, const BoundaryParams& bp);

Eigen::MatrixXd stationary_covariance_matrix(int modes, const BoundaryParams& bp);

/// Continuum density rho(t,u) solving the heat equation with Dirichlet data
/// (alpha, beta) from gamma: rho = rho_bar + sum_n c_n exp(-(n pi)^2 t) e_n.
class ContinuumProfile {
 public:
  /// rho(t, .) = rho_bar for all t.
  static ContinuumProfile stationary(const BoundaryParams& bp);

  /// Projects gamma - rho_bar on the first `j_heat` modes.
  static ContinuumProfile from_function(const BoundaryParams& bp, std::function<double(double)> gamma,
                                        int j_heat = 64);

  const BoundaryParams& boundary() const noexcept { return bp_; }
  const ModeVector& coefficients() const noexcept { return coeffs_; }
  bool is_stationary() const noexcept { return stationary_; }

  /// Neglected-coefficient tail: sqrt(2) sum of |c_n| over modes j_heat < n <= 4 j_heat.
  double truncation_tail() const noexcept { return tail_; }

  /// gamma(u) at t = 0, the truncated series otherwise.
  double density(double t, double u) const;
  double initial(double u) const { return gamma_(u); }
  double linear(double u) const { return bp_.alpha + (bp_.beta - bp_.alpha) * u; }

 private:
  ContinuumProfile(BoundaryParams bp, std::function<double(double)> gamma, ModeVector c, double tail, bool stationary)
      : bp_(bp), gamma_(std::move(gamma)), coeffs_(std::move(c)), tail_(tail), stationary_(stationary) {}

  BoundaryParams bp_;
  std::function<double(double)> gamma_;
  ModeVector coeffs_;
  double tail_ = 0.0;
  bool stationary_ = false;
};

struct DynamicCovariance {
  double initial = 0.0;  ///< int chi(gamma) (T_t e_j)(T_s e_k)
  double noise = 0.0;    ///< 2 int_0^s dr int chi(rho(r,u)) (T_{t-r} e_j)' (T_{s-r} e_k)'
  double error = 0.0;    ///< quadrature error estimate of the noise term
  double total() const { return initial + noise; }
};

/// E[Y_t(e_j) Y_s(e_k)], 0 <= s <= t, for the limit field started from the product
/// measure of gamma. Space integrals by composite Gauss-Legendre, the time integral
/// by adaptive Gauss-Kronrod; NumericalError if the latter misses `tolerance`.
DynamicCovariance dynamic_covariance(double t, double s, int j, int k, const ContinuumProfile& cp,
                                     double tolerance = 1e-10);

/// Equal-time matrix [E Y_t(e_j) Y_t(e_k)]_{j,k <= modes}.
Eigen::MatrixXd dynamic_covariance_matrix(double t, int modes, const ContinuumProfile& cp, double tolerance = 1e-10);

/// Tabulates chi(rho(t,u)) on a fixed composite Gauss-Legendre rule.
class ChiOnNodes {
 public:
  explicit ChiOnNodes(const ContinuumProfile& cp, int panels = 4);

  const UnitQuadrature& quadrature() const noexcept { return quad_; }
  /// chi(rho(t, u_i)) for every node.
  const std::vector<double>& at(double t);
  /// int chi(rho(t,u)) f(u) g(u) du for tabulated f, g.
  double weighted(double t, const std::vector<double>& f, const std::vector<double>& g);

 private:
  const ContinuumProfile& cp_;
  UnitQuadrature quad_;
  std::vector<double> modes_;  // e_n(u_i), row n-1
  std::vector<double> values_;
};

}  // namespace ssep
