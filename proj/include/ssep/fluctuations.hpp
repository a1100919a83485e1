#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ssep/lattice_fields.hpp"
#include "ssep/process.hpp"

namespace ssep {

/// Y(e_j), j = 1..J, of one configuration at one observation time.
struct FieldSample {
  double time = 0.0;
  std::vector<double> y;
};

/// e_j(x/N) tabulated for j = 1..J and x = 1..N-1.
class FieldProjector {
 public:
  FieldProjector(int n, int modes);

  int n() const noexcept { return n_; }
  int modes() const noexcept { return modes_; }
  double mode_value(int j, int x) const { return table_[static_cast<std::size_t>(j - 1) * (n_ - 1) + (x - 1)]; }

  /// Y(e_j) = N^{-1/2} sum_x e_j(x/N) (eta(x) - centering(x)).
  FieldSample project(const LatticeConfig& config, const Profile1D& centering, double time = 0.0) const;

 private:
  int n_;
  int modes_;
  std::vector<double> table_;
};

FieldSample project_field(const LatticeConfig& config, const Profile1D& centering, int modes, double time = 0.0);

enum class InitialCondition {
  StationaryBurnIn,  ///< product(linear profile), then burn-in; fields centred on the linear profile
  Product,           ///< product(gamma); fields centred on the semidiscrete heat solution
};

struct EnsembleSpec {
  int n = 32;
  BoundaryParams bp;
  InitialCondition initial = InitialCondition::StationaryBurnIn;
  std::function<double(double)> gamma;  ///< product-mode initial profile on [0,1]
  int replicas = 1000;
  std::vector<double> times{0.0};       ///< diffusive, measured after burn-in
  double burn_in = 1.0;
  std::uint64_t seed = 0;
  int modes = 4;
  int workers = 1;
  bool record_pairs = false;            ///< accumulate eta(x) eta(y) counts
  /// Stationary mode only: one long chain, sampled every `times[0]` after burn-in
  /// (autocorrelated; kept for performance comparisons).
  bool single_chain = false;

  void validate() const;
};

struct EnsembleResult {
  std::vector<double> times;
  int n = 0;
  int replicas = 0;
  std::vector<std::vector<FieldSample>> samples;  ///< [time][replica]
  std::vector<Profile1D> centering;               ///< per time
  std::vector<std::vector<std::uint64_t>> occupied;  ///< [time][x-1]: replicas with eta(x) = 1
  std::vector<std::vector<std::uint64_t>> pairs;     ///< [time][triangle index]: replicas with eta(x) eta(y) = 1
  std::uint64_t events = 0;  ///< uniformized clock attempts, including no-op rings

  Eigen::MatrixXd mode_matrix(std::size_t time_index) const;  ///< replicas x modes
  std::vector<double> mean_density(std::size_t time_index) const;
  std::vector<double> mean_density_se(std::size_t time_index) const;
  /// Sample covariance of (eta(x), eta(y)) over replicas and its standard error.
  TriangleField two_point(std::size_t time_index) const;
  TriangleField two_point_se(std::size_t time_index) const;
};

/// Replica ensemble under the seeding contract: replica r uses RandomStream(seed, r),
/// so results are bit-identical for any worker count.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

/// Unbiased sample covariance with delta-method standard errors
/// se_jk^2 = (m22_jk - c_jk^2) / n, m22_jk the mean of (y_j - m_j)^2 (y_k - m_k)^2.
struct CovarianceEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
  std::size_t count = 0;
};

CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& samples);  ///< rows are samples
CovarianceEstimate estimate_covariance(std::span<const FieldSample> samples);

struct ModeMoments {
  int mode = 0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double z_skewness = 0.0;
  double z_kurtosis = 0.0;
  bool flagged = false;
};

struct GaussianityReport {
  std::vector<ModeMoments> modes;
  double threshold = 4.0;
  bool any_flagged() const;
};

/// Per-column sample skewness and excess kurtosis against the Gaussian null
/// (exact small-sample standard errors); flags |z| > threshold. Needs >= 1000 rows.
GaussianityReport gaussianity_check(const Eigen::MatrixXd& samples, double threshold = 4.0);

/// CSV (replica, time, j, value).
void write_samples_csv(std::ostream& os, const EnsembleResult& result);

}  // namespace ssep
