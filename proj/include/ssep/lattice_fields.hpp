#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ssep {

/// Reservoir densities at the two ends of the chain. No ordering is imposed.
struct BoundaryParams {
  double alpha = 0.5;
  double beta = 0.5;

  /// Validating constructor; throws ConfigError unless both lie in [0, 1].
  static BoundaryParams make(double alpha, double beta);

  double chi_alpha() const { return alpha * (1.0 - alpha); }
  double chi_beta() const { return beta * (1.0 - beta); }
};

/// Density on the sites x = 0..N of the chain. Entries 0 and N hold the
/// reservoir densities and are never touched by the solvers.
class Profile1D {
 public:
  Profile1D(int n, BoundaryParams bp);

  /// Interior values for x = 1..N-1 given in order.
  Profile1D(int n, BoundaryParams bp, std::span<const double> interior);

  /// Discrete stationary profile alpha + (beta - alpha) x / N.
  static Profile1D linear(int n, BoundaryParams bp);

  /// Interior samples gamma(x / N); the boundary entries stay alpha and beta.
  static Profile1D from_function(int n, BoundaryParams bp, const std::function<double(double)>& gamma);

  int n() const noexcept { return n_; }
  const BoundaryParams& boundary() const noexcept { return bp_; }

  double operator[](int x) const { return values_[static_cast<std::size_t>(x)]; }
  double at(int x) const;
  void set(int x, double v);

  /// All N+1 values including the clamped ends.
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> interior() const noexcept { return std::span(values_).subspan(1, n_ - 1); }

  /// max over x = 0..N-1 of N |rho(x+1) - rho(x)|, i.e. including the boundary differences.
  double max_gradient() const;

 private:
  int n_;
  BoundaryParams bp_;
  std::vector<double> values_;
};

/// Function on V ∪ ∂V, V = {0 < x < y < N}, vanishing on ∂V = {x = 0 or y = N}.
/// Only the interior of V is stored, row by row in x.
class TriangleField {
 public:
  explicit TriangleField(int n);

  static TriangleField from_function(int n, const std::function<double(int, int)>& f);

  int n() const noexcept { return n_; }
  std::size_t interior_size() const noexcept { return values_.size(); }

  /// Accepts 0 <= x < y <= N; boundary points read as exactly zero.
  double at(int x, int y) const;
  void set(int x, int y, double v);

  static bool is_boundary(int n, int x, int y) { return x == 0 || y == n; }
  std::size_t index(int x, int y) const;

  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

  double sup_norm() const;
  double max_value() const;

 private:
  int n_;
  std::vector<double> values_;
};

/// Source supported on the superdiagonal y = x + 1, g(x) for x = 1..N-2.
class DiagonalSource {
 public:
  explicit DiagonalSource(int n);
  DiagonalSource(int n, double constant);

  int n() const noexcept { return n_; }
  double operator()(int x) const { return values_[static_cast<std::size_t>(x - 1)]; }
  void set(int x, double v);
  std::span<const double> values() const noexcept { return values_; }
  double sup_norm() const;

 private:
  int n_;
  std::vector<double> values_;
};

}  // namespace ssep
