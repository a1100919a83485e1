#include "ssep/lattice_fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssep/errors.hpp"

namespace ssep {

BoundaryParams BoundaryParams::make(double alpha, double beta) {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!ok(alpha) || !ok(beta)) {
    throw ConfigError("boundary densities must lie in [0,1], got alpha=" + std::to_string(alpha) +
                      " beta=" + std::to_string(beta));
  }
  return BoundaryParams{alpha, beta};
}

Profile1D::Profile1D(int n, BoundaryParams bp) : n_(n), bp_(bp), values_(static_cast<std::size_t>(n + 1), 0.0) {
  if (n < 2) throw ConfigError("profile needs N >= 2");
  values_.front() = bp.alpha;
  values_.back() = bp.beta;
}

Profile1D::Profile1D(int n, BoundaryParams bp, std::span<const double> interior) : Profile1D(n, bp) {
  if (interior.size() != static_cast<std::size_t>(n - 1)) throw ConfigError("profile interior must have N-1 entries");
  std::copy(interior.begin(), interior.end(), values_.begin() + 1);
}

Profile1D Profile1D::linear(int n, BoundaryParams bp) {
  Profile1D p(n, bp);
  for (int x = 1; x < n; ++x) p.values_[x] = bp.alpha + (bp.beta - bp.alpha) * x / n;
  return p;
}

Profile1D Profile1D::from_function(int n, BoundaryParams bp, const std::function<double(double)>& gamma) {
  Profile1D p(n, bp);
  for (int x = 1; x < n; ++x) p.values_[x] = gamma(static_cast<double>(x) / n);
  return p;
}

double Profile1D::at(int x) const {
  if (x < 0 || x > n_) throw std::out_of_range("profile index out of range");
  return values_[static_cast<std::size_t>(x)];
}

void Profile1D::set(int x, double v) {
  if (x < 1 || x > n_ - 1) throw std::out_of_range("only interior profile entries are writable");
  values_[static_cast<std::size_t>(x)] = v;
}

double Profile1D::max_gradient() const {
  double m = 0.0;
  for (int x = 0; x < n_; ++x) m = std::max(m, n_ * std::abs(values_[x + 1] - values_[x]));
  return m;
}

TriangleField::TriangleField(int n) : n_(n) {
  if (n < 2) throw ConfigError("triangle field needs N >= 2");
  const auto m = static_cast<std::size_t>(n - 1);
  values_.assign(m * (m - 1) / 2, 0.0);
}

TriangleField TriangleField::from_function(int n, const std::function<double(int, int)>& f) {
  TriangleField t(n);
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y) t.values_[t.index(x, y)] = f(x, y);
  return t;
}

std::size_t TriangleField::index(int x, int y) const {
  // Row x holds y = x+1..N-1; rows 1..x-1 hold (N-2) + ... + (N-x) entries.
  const auto xm = static_cast<std::size_t>(x - 1);
  const auto nm = static_cast<std::size_t>(n_ - 1);
  return xm * nm - xm * (xm + 1) / 2 + static_cast<std::size_t>(y - x - 1);
}

double TriangleField::at(int x, int y) const {
  if (x < 0 || y > n_ || x >= y) throw std::out_of_range("triangle index requires 0 <= x < y <= N");
  if (is_boundary(n_, x, y)) return 0.0;
  return values_[index(x, y)];
}

void TriangleField::set(int x, int y, double v) {
  if (x < 1 || y > n_ - 1 || x >= y) throw std::out_of_range("only interior triangle entries are writable");
  values_[index(x, y)] = v;
}

double TriangleField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double TriangleField::max_value() const {
  // The boundary value 0 belongs to the domain.
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

DiagonalSource::DiagonalSource(int n) : DiagonalSource(n, 0.0) {}

DiagonalSource::DiagonalSource(int n, double constant) : n_(n) {
  if (n < 3) throw ConfigError("diagonal source needs N >= 3");
  values_.assign(static_cast<std::size_t>(n - 2), constant);
}

void DiagonalSource::set(int x, double v) {
  if (x < 1 || x > n_ - 2) throw std::out_of_range("diagonal source index must be in 1..N-2");
  values_[static_cast<std::size_t>(x - 1)] = v;
}

double DiagonalSource::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace ssep
