#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ssep/fluctuations.hpp"
#include "ssep/spectral.hpp"

namespace ssep {

/// B_jk(t) = 2 int chi(rho(t,u)) e_j'(u) e_k'(u) du, j,k = 1..J. Closed form for a
/// stationary profile, Gauss-Legendre otherwise. NumericalError if B has an
/// eigenvalue below -1e-10 max(1, |B|).
Eigen::MatrixXd noise_covariance(int modes, const ContinuumProfile& cp, double t);

/// Sigma_jk = B_jk / (lambda_j + lambda_k), the solution of Lambda Sigma + Sigma Lambda = B.
Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& b);

/// max |Lambda Sigma + Sigma Lambda - B|.
double lyapunov_residual(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& b);

/// Stationary covariance of the Euler-Maruyama chain with constant B:
/// S_jk = dt B_jk / (1 - a_j a_k), a_j = 1 - lambda_j dt.
Eigen::MatrixXd euler_stationary_covariance(const Eigen::MatrixXd& b, double dt);

/// Symmetric square root through the eigendecomposition; negative round-off
/// eigenvalues are clamped to zero after the PSD check.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, double tolerance = 1e-10);

enum class OuStepper {
  EulerMaruyama,  ///< Y += -lambda Y dt + sqrt(B(t) dt) xi
  Exact,          ///< exponential integrator; stationary profile only
};

enum class OuStart {
  Zero,
  Given,            ///< OuSpec::y0
  InitialProfile,   ///< N(0, int chi(gamma) e_j e_k), the product-measure start
  Stationary,       ///< N(0, Lyapunov covariance); stationary profile only
};

struct OuSpec {
  int modes = 16;
  double dt = 1e-3;
  double t_final = 1.0;
  double burn_in = 0.0;     ///< steps before burn_in are not observed
  std::uint64_t seed = 0;
  OuStepper stepper = OuStepper::EulerMaruyama;
  bool auto_shrink = true;  ///< enforce lambda_J dt <= 0.1
  OuStart start = OuStart::Zero;
  Eigen::VectorXd y0;
  int record_stride = 0;    ///< keep every k-th observed state; 0 keeps none

  void validate() const;
};

struct OuRun {
  double dt = 0.0;  ///< step actually used
  std::uint64_t steps = 0;
  std::vector<double> times;
  Eigen::MatrixXd states;  ///< rows are recorded states
};

/// Step used by simulate_ou: dt, shrunk to 0.1 / lambda_J when auto_shrink is set,
/// then reduced so that t_final is a whole number of steps.
double ou_step_size(const OuSpec& spec);

using OuObserver = std::function<void(double t, const Eigen::VectorXd& y)>;

/// Galerkin truncation of the limiting OU equation driven by the profile path of `cp`.
/// Deterministic given the seed (RandomStream(seed, 0)).
OuRun simulate_ou(const OuSpec& spec, const ContinuumProfile& cp, const OuObserver& observer = {});

/// Batch means of y y^T along a trajectory with zero mean: estimate is the grand
/// mean, se the standard deviation of batch means over sqrt(batches).
class BatchCovariance {
 public:
  BatchCovariance(int modes, std::uint64_t batch_length);

  void add(const Eigen::VectorXd& y);
  std::size_t batches() const noexcept { return batches_.size(); }
  CovarianceEstimate estimate() const;

 private:
  std::uint64_t batch_length_;
  std::uint64_t fill_ = 0;
  Eigen::MatrixXd current_;
  std::vector<Eigen::MatrixXd> batches_;
};

/// CSV (t, j, value).
void write_trajectory_csv(std::ostream& os, const OuRun& run);

}  // namespace ssep
