#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "ssep/lattice_fields.hpp"

namespace ssep {

enum class CriterionKind { Numerical, Statistical };

struct CriterionResult {
  int id = 0;
  std::string name;
  CriterionKind kind = CriterionKind::Numerical;
  bool passed = false;
  std::string summary;
  nlohmann::json metrics = nlohmann::json::object();
  double seconds = 0.0;
};

nlohmann::json to_json(const CriterionResult& c);

/// One entry of a covariance comparison; pass iff |estimate - analytic| <= max(4 se, allowance).
struct CovarianceRow {
  double time = 0.0;
  int j = 0;
  int k = 0;
  double estimate = 0.0;
  double se = 0.0;
  double analytic = 0.0;
  double z = 0.0;
  bool within = false;
};

/// CSV (j, k, estimate, se, analytic, z); with `with_time` a leading t column.
void write_covariance_csv(std::ostream& os, const std::vector<CovarianceRow>& rows, bool with_time = false);
nlohmann::json covariance_json(const std::vector<CovarianceRow>& rows);

// ---------------------------------------------------------------------------
// Experiments with free parameters, shared by the CLI and the acceptance suite.

struct ExactCheck {
  int n = 0;
  BoundaryParams bp;
  double profile_error = 0.0;    ///< max |E eta(x) - linear(x)|
  double magnitude_error = 0.0;  ///< max | |phi| - (beta-alpha)^2/(N-1) (x/N)(1-y/N) |
  double signed_error = 0.0;     ///< max |phi - sigma (beta-alpha)^2/(N-1) (x/N)(1-y/N)|
  int sign = 0;                  ///< sign of phi where the closed form is nonzero; 0 if none
  bool sign_uniform = true;
};

ExactCheck exact_check(int n, const BoundaryParams& bp);

struct StationaryCovExperiment {
  int n = 128;
  BoundaryParams bp;
  int modes = 4;
  int replicas = 20000;
  double burn_in = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  double allowance = 0.0;  ///< absolute tolerance floor next to 4 SE
};

struct StationaryCovReport {
  std::vector<CovarianceRow> rows;  ///< j <= k
  bool covariance_ok = true;
  bool gaussian_ok = true;          ///< true when too few replicas to test
  bool gaussian_tested = false;
  nlohmann::json gaussianity = nlohmann::json::array();
  std::uint64_t events = 0;
};

StationaryCovReport stationary_cov_experiment(const StationaryCovExperiment& e);

/// gamma(u) = alpha + (beta - alpha) u^2.
std::function<double(double)> quadratic_profile(const BoundaryParams& bp);

struct RelaxExperiment {
  int n = 128;
  BoundaryParams bp;
  std::function<double(double)> gamma;  ///< defaults to quadratic_profile
  int modes = 3;
  int replicas = 20000;
  std::vector<double> times{0.05, 0.1, 0.2};
  std::uint64_t seed = 0;
  int workers = 1;
  double allowance = 0.02;
};

struct RelaxReport {
  std::vector<CovarianceRow> rows;
  bool covariance_ok = true;
  bool profile_ok = true;
  double max_profile_z = 0.0;
  std::uint64_t events = 0;
};

RelaxReport relax_experiment(const RelaxExperiment& e);

struct GreenCheck {
  int n = 0;
  double c = 0.0;
  double closed_form_error = 0.0;
  double maximum = 0.0;
  double bound = 0.0;  ///< c / (4 (N-1))
};

GreenCheck green_check(int n, double c);

struct OuExperiment {
  int modes = 16;
  BoundaryParams bp;
  double dt = 0.0;         ///< 0 selects 0.1 / lambda_J
  double t_final = 400.0;
  double burn_in = 2.0;
  double batch_time = 4.0;
  std::uint64_t seed = 0;
  int check_modes = 16;    ///< Euler-Maruyama entries compared for j, k <= check_modes
};

struct OuReport {
  double lyapunov_vs_closed_form = 0.0;
  double lyapunov_residual = 0.0;
  double dt = 0.0;
  std::vector<CovarianceRow> euler_rows;  ///< j <= k <= check_modes
  std::vector<CovarianceRow> exact_rows;  ///< all j <= k
  bool euler_ok = true;
  bool exact_ok = true;
};

/// Lyapunov check plus long Euler-Maruyama and exact-stepper runs at the stationary profile.
OuReport ou_experiment(const OuExperiment& e);

struct OuBiasReport {
  int mode = 0;
  double dt = 0.0;
  double bias_dt = 0.0, se_dt = 0.0;
  double bias_half = 0.0, se_half = 0.0;
  double predicted_dt = 0.0, predicted_half = 0.0;  ///< from the discrete stationary covariance
  bool detected = false;  ///< bias at dt exceeds 4 SE
  bool halves = false;    ///< |b(dt) - 2 b(dt/2)| <= 4 SE
};

OuBiasReport ou_bias_experiment(int modes, const BoundaryParams& bp, double t_final, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Acceptance criteria.

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  int workers = 1;
};

CriterionResult criterion_exact_correlations();
CriterionResult criterion_green_function();
CriterionResult criterion_equilibrium_fluctuations(const AcceptanceOptions& o);
CriterionResult criterion_stationary_fluctuations(const AcceptanceOptions& o);
CriterionResult criterion_relaxation(const AcceptanceOptions& o);
CriterionResult criterion_ou_consistency(const AcceptanceOptions& o);
CriterionResult criterion_maximum_principles(const AcceptanceOptions& o);
CriterionResult criterion_martingale(const AcceptanceOptions& o);
CriterionResult criterion_spectral_identities();

/// Runs the listed criteria (1..9; empty means all), timing each.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o, const std::vector<int>& ids = {});

}  // namespace ssep
