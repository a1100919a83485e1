#include "ssep/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "ssep/errors.hpp"

namespace ssep {
namespace {

using Gauss64 = boost::math::quadrature::gauss<double, 64>;

template <class F>
double gl64(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  return Gauss64::integrate(f, a, b);
}

const UnitQuadrature& default_quadrature() {
  static const UnitQuadrature q(4);
  return q;
}

}  // namespace

UnitQuadrature::UnitQuadrature(int panels) {
  if (panels < 1) throw ConfigError("quadrature needs at least one panel");
  const auto& x = Gauss64::abscissa();
  const auto& w = Gauss64::weights();
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      // Gauss64 stores the nonnegative half of a symmetric rule (no zero node for even order).
      nodes_.push_back(mid - 0.5 * h * x[i]);
      weights_.push_back(0.5 * h * w[i]);
      nodes_.push_back(mid + 0.5 * h * x[i]);
      weights_.push_back(0.5 * h * w[i]);
    }
  }
}

SineBasis::SineBasis(int j_max) : j_max_(j_max) {
  if (j_max < 1) throw ConfigError("sine basis needs at least one mode");
}

Eigen::MatrixXd SineBasis::gram(const UnitQuadrature& q) const {
  Eigen::MatrixXd g(j_max_, j_max_);
  for (int j = 1; j <= j_max_; ++j)
    for (int k = 1; k <= j_max_; ++k)
      g(j - 1, k - 1) = q.integrate([&](double u) { return sine_mode(j, u) * sine_mode(k, u); });
  return g;
}

ModeVector ModeVector::unit(int j, int n) {
  ModeVector v(j);
  v(n) = 1.0;
  return v;
}

ModeVector ModeVector::project(const std::function<double(double)>& f, int j, const UnitQuadrature& q) {
  ModeVector v(j);
  for (int n = 1; n <= j; ++n) v(n) = q.integrate([&](double u) { return f(u) * sine_mode(n, u); });
  return v;
}

double ModeVector::evaluate(double u) const {
  double acc = 0.0;
  for (int n = 1; n <= size(); ++n) acc += (*this)(n)*sine_mode(n, u);
  return acc;
}

double ModeVector::l2_norm() const {
  double acc = 0.0;
  for (double c : coeffs) acc += c * c;
  return std::sqrt(acc);
}

ModeVector semigroup_apply(double t, const ModeVector& v) {
  if (!(t >= 0.0)) throw ConfigError("semigroup time must be nonnegative");
  ModeVector out = v;
  for (int n = 1; n <= v.size(); ++n) out(n) *= std::exp(-mode_eigenvalue(n) * t);
  return out;
}

ModeVector inverse_laplacian(const ModeVector& v) {
  ModeVector out = v;
  for (int n = 1; n <= v.size(); ++n) out(n) /= mode_eigenvalue(n);
  return out;
}

double kernel_bilinear(const std::function<double(double)>& f, const std::function<double(double)>& g,
                       const UnitQuadrature& q) {
  // Inner integral split at the kink v = u so each piece is smooth.
  return q.integrate([&](double u) {
    const double lower = gl64([&](double v) { return v * g(v); }, 0.0, u);
    const double upper = gl64([&](double v) { return (1.0 - v) * g(v); }, u, 1.0);
    return f(u) * ((1.0 - u) * lower + u * upper);
  });
}

double sobolev_norm(const ModeVector& v, double k, int sign) {
  const double e = (sign >= 0 ? 2.0 : -2.0) * k;
  double acc = 0.0;
  for (int n = 1; n <= v.size(); ++n) acc += std::pow(n * std::numbers::pi, e) * v(n) * v(n);
  return std::sqrt(acc);
}

ChiQuadratic ChiQuadratic::of(const BoundaryParams& bp) {
  const double d = bp.beta - bp.alpha;
  return {bp.alpha * (1.0 - bp.alpha), d * (1.0 - 2.0 * bp.alpha), -d * d};
}

double cosine_moment(int p, int m) {
  if (m < 0) m = -m;
  if (m == 0) return 1.0 / (p + 1);
  const double mp = m * std::numbers::pi;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  switch (p) {
    case 0:
      return 0.0;
    case 1:
      return (sign - 1.0) / (mp * mp);
    case 2:
      return 2.0 * sign / (mp * mp);
    default:
      throw ConfigError("cosine_moment supports p <= 2");
  }
}

namespace {

// int chi(rho_bar) cos(m pi u) du
double chi_cosine(const ChiQuadratic& q, int m) {
  return q.a * cosine_moment(0, m) + q.b * cosine_moment(1, m) + q.c * cosine_moment(2, m);
}

}  // namespace

double stationary_chi_moment(int j, int k, const BoundaryParams& bp) {
  // 2 sin(j pi u) sin(k pi u) = cos((j-k) pi u) - cos((j+k) pi u)
  const auto q = ChiQuadratic::of(bp);
  return chi_cosine(q, j - k) - chi_cosine(q, j + k);
}

double stationary_gradient_moment(int j, int k, const BoundaryParams& bp) {
  // e_j' e_k' = j k pi^2 [cos((j-k) pi u) + cos((j+k) pi u)]
  const auto q = ChiQuadratic::of(bp);
  return j * k * std::numbers::pi * std::numbers::pi * (chi_cosine(q, j - k) + chi_cosine(q, j + k));
}

double stationary_covariance(int j, int k, const BoundaryParams& bp) {
  if (j < 1 || k < 1) throw ConfigError("mode indices start at 1");
  const double d = bp.beta - bp.alpha;
  double v = stationary_chi_moment(j, k, bp);
  if (j == k) v -= d * d / mode_eigenvalue(j);
  return v;
}

double stationary_covariance_quadrature(int j, int k, const BoundaryParams& bp) {
  if (j < 1 || k < 1) throw ConfigError("mode indices start at 1");
  const auto& q = default_quadrature();
  const double d = bp.beta - bp.alpha;
  auto rho = [&](double u) { return bp.alpha + d * u; };
  const double first = q.integrate([&](double u) { return chi(rho(u)) * sine_mode(j, u) * sine_mode(k, u); });
  const double second = kernel_bilinear([&](double u) { return sine_mode(j, u); },
                                        [&](double v) { return sine_mode(k, v); }, UnitQuadrature(1));
  return first - d * d * second;
}

Eigen::MatrixXd stationary_covariance_matrix(int modes, const BoundaryParams& bp) {
  Eigen::MatrixXd m(modes, modes);
  for (int j = 1; j <= modes; ++j)
    for (int k = 1; k <= modes; ++k) m(j - 1, k - 1) = stationary_covariance(j, k, bp);
  return m;
}

ContinuumProfile ContinuumProfile::stationary(const BoundaryParams& bp) {
  auto lin = [bp](double u) { return bp.alpha + (bp.beta - bp.alpha) * u; };
  return ContinuumProfile(bp, lin, ModeVector(1), 0.0, true);
}

ContinuumProfile ContinuumProfile::from_function(const BoundaryParams& bp, std::function<double(double)> gamma,
                                                 int j_heat) {
  if (j_heat < 1) throw ConfigError("heat truncation needs at least one mode");
  const UnitQuadrature q(std::max(8, j_heat / 4));
  auto dev = [&](double u) { return gamma(u) - (bp.alpha + (bp.beta - bp.alpha) * u); };
  ModeVector all = ModeVector::project(dev, 4 * j_heat, q);
  ModeVector kept(j_heat);
  double tail = 0.0;
  for (int n = 1; n <= 4 * j_heat; ++n) {
    if (n <= j_heat)
      kept(n) = all(n);
    else
      tail += std::numbers::sqrt2 * std::abs(all(n));
  }
  return ContinuumProfile(bp, std::move(gamma), std::move(kept), tail, false);
}

double ContinuumProfile::density(double t, double u) const {
  if (t <= 0.0 || stationary_) return t <= 0.0 ? gamma_(u) : linear(u);
  double rho = linear(u);
  for (int n = 1; n <= coeffs_.size(); ++n) {
    const double decay = std::exp(-mode_eigenvalue(n) * t);
    if (decay < 1e-300) break;
    rho += coeffs_(n) * decay * sine_mode(n, u);
  }
  return rho;
}

ChiOnNodes::ChiOnNodes(const ContinuumProfile& cp, int panels) : cp_(cp), quad_(panels) {
  const auto& u = quad_.nodes();
  const int jn = cp.coefficients().size();
  modes_.resize(static_cast<std::size_t>(jn) * u.size());
  for (int n = 1; n <= jn; ++n)
    for (std::size_t i = 0; i < u.size(); ++i) modes_[static_cast<std::size_t>(n - 1) * u.size() + i] = sine_mode(n, u[i]);
  values_.resize(u.size());
}

const std::vector<double>& ChiOnNodes::at(double t) {
  const auto& u = quad_.nodes();
  const std::size_t m = u.size();
  if (t <= 0.0) {
    for (std::size_t i = 0; i < m; ++i) values_[i] = chi(cp_.initial(u[i]));
    return values_;
  }
  std::vector<double> rho(m);
  for (std::size_t i = 0; i < m; ++i) rho[i] = cp_.linear(u[i]);
  if (!cp_.is_stationary()) {
    const auto& c = cp_.coefficients();
    for (int n = 1; n <= c.size(); ++n) {
      const double amp = c(n) * std::exp(-mode_eigenvalue(n) * t);
      if (std::abs(amp) < 1e-300) break;
      const double* row = &modes_[static_cast<std::size_t>(n - 1) * m];
      for (std::size_t i = 0; i < m; ++i) rho[i] += amp * row[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i) values_[i] = chi(rho[i]);
  return values_;
}

double ChiOnNodes::weighted(double t, const std::vector<double>& f, const std::vector<double>& g) {
  const auto& c = at(t);
  const auto& w = quad_.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += w[i] * c[i] * f[i] * g[i];
  return acc;
}

namespace {

std::vector<double> tabulate(const UnitQuadrature& q, const std::function<double(double)>& f) {
  std::vector<double> out;
  out.reserve(q.nodes().size());
  for (double u : q.nodes()) out.push_back(f(u));
  return out;
}

DynamicCovariance dynamic_entry(double t, double s, int j, int k, ChiOnNodes& nodes, double tolerance) {
  if (!(s >= 0.0 && t >= s)) throw ConfigError("dynamic covariance needs 0 <= s <= t");
  const auto& q = nodes.quadrature();
  const auto ej = tabulate(q, [j](double u) { return sine_mode(j, u); });
  const auto ek = tabulate(q, [k](double u) { return sine_mode(k, u); });
  const auto dj = tabulate(q, [j](double u) { return sine_mode_derivative(j, u); });
  const auto dk = tabulate(q, [k](double u) { return sine_mode_derivative(k, u); });
  const double lj = mode_eigenvalue(j);
  const double lk = mode_eigenvalue(k);

  DynamicCovariance out;
  out.initial = std::exp(-lj * t - lk * s) * nodes.weighted(0.0, ej, ek);
  if (s > 0.0) {
    auto integrand = [&](double r) {
      return 2.0 * std::exp(-lj * (t - r) - lk * (s - r)) * nodes.weighted(r, dj, dk);
    };
    double err = 0.0;
    double l1 = 0.0;
    out.noise = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, s, 20, tolerance,
                                                                              &err, &l1);
    out.error = err;
    if (!(err <= tolerance * std::max(1.0, l1))) throw NumericalError("time quadrature did not converge", err);
  }
  return out;
}

}  // namespace

DynamicCovariance dynamic_covariance(double t, double s, int j, int k, const ContinuumProfile& cp, double tolerance) {
  if (j < 1 || k < 1) throw ConfigError("mode indices start at 1");
  ChiOnNodes nodes(cp);
  return dynamic_entry(t, s, j, k, nodes, tolerance);
}

Eigen::MatrixXd dynamic_covariance_matrix(double t, int modes, const ContinuumProfile& cp, double tolerance) {
  ChiOnNodes nodes(cp);
  Eigen::MatrixXd m(modes, modes);
  for (int j = 1; j <= modes; ++j) {
    for (int k = j; k <= modes; ++k) {
      m(j - 1, k - 1) = dynamic_entry(t, t, j, k, nodes, tolerance).total();
      m(k - 1, j - 1) = m(j - 1, k - 1);
    }
  }
  return m;
}

}  // namespace ssep
