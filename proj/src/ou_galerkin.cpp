#include "ssep/ou_galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/parallel.hpp"
#include "ssep/rng.hpp"

namespace ssep {

namespace {

Eigen::VectorXd eigenvalues(int modes) {
  Eigen::VectorXd l(modes);
  for (int j = 1; j <= modes; ++j) l(j - 1) = mode_eigenvalue(j);
  return l;
}

void check_psd(const Eigen::MatrixXd& b, double tolerance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  const double floor = -tolerance * std::max(1.0, b.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < floor)
    throw NumericalError("noise covariance is not positive semidefinite", es.eigenvalues().minCoeff());
}

// e_n' on the nodes of a ChiOnNodes rule, row n-1.
std::vector<std::vector<double>> derivative_table(int modes, const UnitQuadrature& q) {
  std::vector<std::vector<double>> d(static_cast<std::size_t>(modes));
  for (int n = 1; n <= modes; ++n)
    for (double u : q.nodes()) d[static_cast<std::size_t>(n - 1)].push_back(sine_mode_derivative(n, u));
  return d;
}

Eigen::MatrixXd noise_from_nodes(int modes, ChiOnNodes& chi_nodes, const std::vector<std::vector<double>>& d,
                                 double t) {
  Eigen::MatrixXd b(modes, modes);
  for (int j = 0; j < modes; ++j)
    for (int k = j; k < modes; ++k)
      b(j, k) = b(k, j) =
          2.0 * chi_nodes.weighted(t, d[static_cast<std::size_t>(j)], d[static_cast<std::size_t>(k)]);
  check_psd(b, 1e-10);
  return b;
}

}  // namespace

Eigen::MatrixXd noise_covariance(int modes, const ContinuumProfile& cp, double t) {
  if (modes < 1) throw ConfigError("noise covariance needs at least one mode");
  if (!(t >= 0.0)) throw ConfigError("noise covariance time must be nonnegative");
  if (cp.is_stationary()) {
    Eigen::MatrixXd b(modes, modes);
    for (int j = 1; j <= modes; ++j)
      for (int k = j; k <= modes; ++k)
        b(j - 1, k - 1) = b(k - 1, j - 1) = 2.0 * stationary_gradient_moment(j, k, cp.boundary());
    check_psd(b, 1e-10);
    return b;
  }
  ChiOnNodes chi_nodes(cp, 8);
  return noise_from_nodes(modes, chi_nodes, derivative_table(modes, chi_nodes.quadrature()), t);
}

Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& b) {
  const auto modes = static_cast<int>(b.rows());
  const Eigen::VectorXd l = eigenvalues(modes);
  Eigen::MatrixXd s(modes, modes);
  for (int j = 0; j < modes; ++j)
    for (int k = 0; k < modes; ++k) s(j, k) = b(j, k) / (l(j) + l(k));
  return s;
}

double lyapunov_residual(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd l = eigenvalues(static_cast<int>(b.rows()));
  const Eigen::MatrixXd r = l.asDiagonal() * sigma + sigma * l.asDiagonal() - b;
  return r.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd euler_stationary_covariance(const Eigen::MatrixXd& b, double dt) {
  const auto modes = static_cast<int>(b.rows());
  const Eigen::VectorXd l = eigenvalues(modes);
  Eigen::MatrixXd s(modes, modes);
  for (int j = 0; j < modes; ++j)
    for (int k = 0; k < modes; ++k) s(j, k) = dt * b(j, k) / (1.0 - (1.0 - l(j) * dt) * (1.0 - l(k) * dt));
  return s;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, double tolerance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double floor = -tolerance * std::max(1.0, m.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < floor)
    throw NumericalError("matrix is not positive semidefinite", es.eigenvalues().minCoeff());
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void OuSpec::validate() const {
  if (modes < 1) throw ConfigError("OU run needs at least one mode");
  if (!(dt > 0.0)) throw ConfigError("OU step must be positive");
  if (!(t_final > 0.0)) throw ConfigError("OU horizon must be positive");
  if (!(burn_in >= 0.0) || burn_in > t_final) throw ConfigError("OU burn-in must lie in [0, t_final]");
  if (record_stride < 0) throw ConfigError("record stride must be nonnegative");
  if (start == OuStart::Given && y0.size() != modes) throw ConfigError("initial state has the wrong size");
}

double ou_step_size(const OuSpec& spec) {
  spec.validate();
  double dt = spec.dt;
  if (spec.auto_shrink) dt = std::min(dt, 0.1 / mode_eigenvalue(spec.modes));
  const auto steps = static_cast<std::uint64_t>(std::ceil(spec.t_final / dt - 1e-9));
  return spec.t_final / static_cast<double>(steps);
}

OuRun simulate_ou(const OuSpec& spec, const ContinuumProfile& cp, const OuObserver& observer) {
  spec.validate();
  const int modes = spec.modes;
  const bool stationary = cp.is_stationary();
  if (spec.stepper == OuStepper::Exact && !stationary)
    throw ConfigError("the exact OU stepper needs a stationary profile");
  if (spec.start == OuStart::Stationary && !stationary)
    throw ConfigError("stationary start needs a stationary profile");

  const Eigen::VectorXd lam = eigenvalues(modes);
  const double dt = ou_step_size(spec);
  const auto steps = static_cast<std::uint64_t>(std::llround(spec.t_final / dt));

  RandomStream rng(spec.seed, 0);
  auto gaussian = [&](const Eigen::MatrixXd& root) {
    Eigen::VectorXd xi(modes);
    for (int j = 0; j < modes; ++j) xi(j) = rng.normal();
    return Eigen::VectorXd(root * xi);
  };

  OuRun run;
  run.dt = dt;
  run.steps = steps;

  std::optional<ChiOnNodes> chi_nodes;
  std::vector<std::vector<double>> dtab;
  if (!stationary) {
    chi_nodes.emplace(cp, 8);
    dtab = derivative_table(modes, chi_nodes->quadrature());
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(modes);
  switch (spec.start) {
    case OuStart::Zero:
      break;
    case OuStart::Given:
      y = spec.y0;
      break;
    case OuStart::InitialProfile: {
      UnitQuadrature q(8);
      Eigen::MatrixXd c(modes, modes);
      for (int j = 1; j <= modes; ++j)
        for (int k = j; k <= modes; ++k)
          c(j - 1, k - 1) = c(k - 1, j - 1) =
              q.integrate([&](double u) { return chi(cp.initial(u)) * sine_mode(j, u) * sine_mode(k, u); });
      y = gaussian(symmetric_sqrt(c));
      break;
    }
    case OuStart::Stationary:
      y = gaussian(symmetric_sqrt(lyapunov_stationary(noise_covariance(modes, cp, 0.0))));
      break;
  }

  Eigen::VectorXd decay(modes);
  Eigen::MatrixXd root;
  if (stationary) {
    const Eigen::MatrixXd b = noise_covariance(modes, cp, 0.0);
    if (spec.stepper == OuStepper::Exact) {
      for (int j = 0; j < modes; ++j) decay(j) = std::exp(-lam(j) * dt);
      Eigen::MatrixXd c(modes, modes);
      for (int j = 0; j < modes; ++j)
        for (int k = 0; k < modes; ++k) c(j, k) = b(j, k) * (1.0 - decay(j) * decay(k)) / (lam(j) + lam(k));
      root = symmetric_sqrt(c);
    } else {
      decay = Eigen::VectorXd::Ones(modes) - dt * lam;
      root = symmetric_sqrt(b * dt);
    }
  } else {
    decay = Eigen::VectorXd::Ones(modes) - dt * lam;
  }

  std::vector<double> recorded;
  auto observe = [&](std::uint64_t step, double t) {
    if (t < spec.burn_in - 1e-12 * spec.t_final) return;
    if (observer) observer(t, y);
    if (spec.record_stride > 0 && step % static_cast<std::uint64_t>(spec.record_stride) == 0) {
      run.times.push_back(t);
      recorded.insert(recorded.end(), y.data(), y.data() + modes);
    }
  };

  observe(0, 0.0);
  Eigen::VectorXd xi(modes), kick(modes);
  for (std::uint64_t s = 1; s <= steps; ++s) {
    const double t0 = static_cast<double>(s - 1) * dt;
    if (!stationary) root = symmetric_sqrt(noise_from_nodes(modes, *chi_nodes, dtab, t0) * dt);
    for (int j = 0; j < modes; ++j) xi(j) = rng.normal();
    kick.noalias() = root * xi;
    y = decay.cwiseProduct(y) + kick;
    if (!y.allFinite()) throw NumericalError("OU state diverged", static_cast<double>(s));
    observe(s, static_cast<double>(s) * dt);
  }
  run.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      recorded.data(), static_cast<Eigen::Index>(run.times.size()), modes);
  return run;
}

BatchCovariance::BatchCovariance(int modes, std::uint64_t batch_length)
    : batch_length_(batch_length), current_(Eigen::MatrixXd::Zero(modes, modes)) {
  if (batch_length == 0) throw ConfigError("batch length must be positive");
}

void BatchCovariance::add(const Eigen::VectorXd& y) {
  current_.noalias() += y * y.transpose();
  if (++fill_ == batch_length_) {
    batches_.push_back(current_ / static_cast<double>(batch_length_));
    current_.setZero();
    fill_ = 0;
  }
}

CovarianceEstimate BatchCovariance::estimate() const {
  const auto nb = batches_.size();
  if (nb < 2) throw ConfigError("batch covariance needs at least 2 complete batches");
  const auto modes = current_.rows();
  CovarianceEstimate est;
  est.count = nb;
  est.mean = Eigen::VectorXd::Zero(modes);
  est.cov.resize(modes, modes);
  est.se.resize(modes, modes);
  for (Eigen::Index j = 0; j < modes; ++j) {
    for (Eigen::Index k = 0; k < modes; ++k) {
      CompensatedSum s;
      for (const auto& b : batches_) s.add(b(j, k));
      const double m = s.value() / static_cast<double>(nb);
      CompensatedSum v;
      for (const auto& b : batches_) v.add((b(j, k) - m) * (b(j, k) - m));
      est.cov(j, k) = m;
      est.se(j, k) = std::sqrt(v.value() / static_cast<double>(nb - 1) / static_cast<double>(nb));
    }
  }
  return est;
}

void write_trajectory_csv(std::ostream& os, const OuRun& run) {
  CsvWriter w(os, {"t", "j", "value"});
  for (Eigen::Index i = 0; i < run.states.rows(); ++i)
    for (Eigen::Index j = 0; j < run.states.cols(); ++j)
      w.row(run.times[static_cast<std::size_t>(i)], static_cast<int>(j + 1), run.states(i, j));
}

}  // namespace ssep
