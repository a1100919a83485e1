#include "ssep/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/exact_oracle.hpp"
#include "ssep/fluctuations.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/martingale.hpp"
#include "ssep/ou_galerkin.hpp"
#include "ssep/rng.hpp"
#include "ssep/spectral.hpp"
#include "ssep/triangle.hpp"

namespace ssep {

using nlohmann::json;

json to_json(const CriterionResult& c) {
  return json{{"id", c.id},
              {"name", c.name},
              {"kind", c.kind == CriterionKind::Numerical ? "numerical" : "statistical"},
              {"passed", c.passed},
              {"summary", c.summary},
              {"seconds", c.seconds},
              {"metrics", c.metrics}};
}

void write_covariance_csv(std::ostream& os, const std::vector<CovarianceRow>& rows, bool with_time) {
  if (with_time) {
    CsvWriter w(os, {"t", "j", "k", "estimate", "se", "analytic", "z"});
    for (const auto& r : rows) w.row(r.time, r.j, r.k, r.estimate, r.se, r.analytic, r.z);
  } else {
    CsvWriter w(os, {"j", "k", "estimate", "se", "analytic", "z"});
    for (const auto& r : rows) w.row(r.j, r.k, r.estimate, r.se, r.analytic, r.z);
  }
}

json covariance_json(const std::vector<CovarianceRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"t", r.time},
                   {"j", r.j},
                   {"k", r.k},
                   {"estimate", r.estimate},
                   {"se", r.se},
                   {"analytic", r.analytic},
                   {"z", r.z},
                   {"within", r.within}});
  return out;
}

namespace {

CovarianceRow make_row(double t, int j, int k, double est, double se, double analytic, double allowance) {
  CovarianceRow r{t, j, k, est, se, analytic, 0.0, false};
  const double d = std::abs(est - analytic);
  r.z = se > 0.0 ? (est - analytic) / se : (d == 0.0 ? 0.0 : INFINITY);
  r.within = d <= std::max(4.0 * se, allowance);
  return r;
}

double max_abs_z(const std::vector<CovarianceRow>& rows) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, std::abs(r.z));
  return m;
}

std::size_t count_outside(const std::vector<CovarianceRow>& rows) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.within; }));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Clamped random walk with slope at most `lipschitz`, started from alpha.
Profile1D random_lipschitz_profile(int n, const BoundaryParams& bp, double lipschitz, RandomStream& rng) {
  Profile1D p(n, bp);
  double v = bp.alpha;
  for (int x = 1; x < n; ++x) {
    v = std::clamp(v + (2.0 * rng.uniform() - 1.0) * lipschitz / n, 0.0, 1.0);
    p.set(x, v);
  }
  return p;
}

CriterionResult make_criterion(int id, std::string name, CriterionKind kind) {
  CriterionResult c;
  c.id = id;
  c.name = std::move(name);
  c.kind = kind;
  return c;
}

BoundaryParams random_boundary(RandomStream& rng) { return BoundaryParams::make(rng.uniform(), rng.uniform()); }

}  // namespace

ExactCheck exact_check(int n, const BoundaryParams& bp) {
  const auto sd = stationary_distribution(build_generator_dense(n, bp));
  const Profile1D prof = exact_profile(sd);
  const Profile1D lin = Profile1D::linear(n, bp);
  ExactCheck c;
  c.n = n;
  c.bp = bp;
  for (int x = 1; x < n; ++x) c.profile_error = std::max(c.profile_error, std::abs(prof[x] - lin[x]));
  if (n < 3) return c;
  const TriangleField tp = exact_two_point(sd);
  const double d2 = (bp.beta - bp.alpha) * (bp.beta - bp.alpha);
  const double nn = n;
  auto closed = [&](int x, int y) { return d2 / (nn - 1.0) * (x / nn) * (1.0 - y / nn); };
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y) {
      const double v = tp.at(x, y), cf = closed(x, y);
      c.magnitude_error = std::max(c.magnitude_error, std::abs(std::abs(v) - cf));
      if (cf > 1e-9) {
        const int s = v > 0.0 ? 1 : -1;
        if (c.sign == 0) c.sign = s;
        if (s != c.sign) c.sign_uniform = false;
      }
    }
  for (int x = 1; x <= n - 2; ++x)
    for (int y = x + 1; y <= n - 1; ++y) {
      const double v = tp.at(x, y);
      c.signed_error = std::max(c.signed_error, std::abs(v - (c.sign == 0 ? 0.0 : c.sign * closed(x, y))));
    }
  return c;
}

StationaryCovReport stationary_cov_experiment(const StationaryCovExperiment& e) {
  EnsembleSpec s;
  s.n = e.n;
  s.bp = e.bp;
  s.initial = InitialCondition::StationaryBurnIn;
  s.replicas = e.replicas;
  s.times = {0.0};
  s.burn_in = e.burn_in;
  s.seed = e.seed;
  s.modes = e.modes;
  s.workers = e.workers;
  const EnsembleResult res = run_ensemble(s);
  const Eigen::MatrixXd y = res.mode_matrix(0);
  const CovarianceEstimate est = estimate_covariance(y);

  StationaryCovReport rep;
  rep.events = res.events;
  for (int j = 1; j <= e.modes; ++j)
    for (int k = j; k <= e.modes; ++k) {
      rep.rows.push_back(make_row(0.0, j, k, est.cov(j - 1, k - 1), est.se(j - 1, k - 1),
                                  stationary_covariance(j, k, e.bp), e.allowance));
      rep.covariance_ok = rep.covariance_ok && rep.rows.back().within;
    }
  if (e.replicas >= 1000) {
    rep.gaussian_tested = true;
    const GaussianityReport g = gaussianity_check(y);
    rep.gaussian_ok = !g.any_flagged();
    for (const auto& m : g.modes)
      rep.gaussianity.push_back({{"mode", m.mode},
                                 {"skewness", m.skewness},
                                 {"excess_kurtosis", m.excess_kurtosis},
                                 {"z_skewness", m.z_skewness},
                                 {"z_kurtosis", m.z_kurtosis},
                                 {"flagged", m.flagged}});
  }
  return rep;
}

std::function<double(double)> quadratic_profile(const BoundaryParams& bp) {
  return [bp](double u) { return bp.alpha + (bp.beta - bp.alpha) * u * u; };
}

RelaxReport relax_experiment(const RelaxExperiment& e) {
  EnsembleSpec s;
  s.n = e.n;
  s.bp = e.bp;
  s.initial = InitialCondition::Product;
  s.gamma = e.gamma ? e.gamma : quadratic_profile(e.bp);
  s.replicas = e.replicas;
  s.times = e.times;
  s.seed = e.seed;
  s.modes = e.modes;
  s.workers = e.workers;
  const EnsembleResult res = run_ensemble(s);
  const ContinuumProfile cp = ContinuumProfile::from_function(e.bp, s.gamma);

  RelaxReport rep;
  rep.events = res.events;
  for (std::size_t ti = 0; ti < e.times.size(); ++ti) {
    const double t = e.times[ti];
    const CovarianceEstimate est = estimate_covariance(res.mode_matrix(ti));
    const Eigen::MatrixXd an = dynamic_covariance_matrix(t, e.modes, cp);
    for (int j = 1; j <= e.modes; ++j)
      for (int k = j; k <= e.modes; ++k) {
        rep.rows.push_back(
            make_row(t, j, k, est.cov(j - 1, k - 1), est.se(j - 1, k - 1), an(j - 1, k - 1), e.allowance));
        rep.covariance_ok = rep.covariance_ok && rep.rows.back().within;
      }
    const auto mean = res.mean_density(ti);
    const auto se = res.mean_density_se(ti);
    const Profile1D& rho = res.centering[ti];
    for (int x = 1; x < e.n; ++x) {
      const auto i = static_cast<std::size_t>(x - 1);
      const double d = std::abs(mean[i] - rho[x]);
      const double z = se[i] > 0.0 ? d / se[i] : (d == 0.0 ? 0.0 : INFINITY);
      rep.max_profile_z = std::max(rep.max_profile_z, z);
    }
  }
  rep.profile_ok = rep.max_profile_z < 4.0;
  return rep;
}

GreenCheck green_check(int n, double c) {
  const TriangleField phi = solve_green_triangle(n, c);
  const TriangleField cf = green_closed_form(n, c);
  GreenCheck g;
  g.n = n;
  g.c = c;
  for (std::size_t i = 0; i < phi.data().size(); ++i)
    g.closed_form_error = std::max(g.closed_form_error, std::abs(phi.data()[i] - cf.data()[i]));
  g.maximum = phi.max_value();
  g.bound = c / (4.0 * (n - 1));
  return g;
}

namespace {

CovarianceEstimate ou_long_run(const OuSpec& spec, const ContinuumProfile& cp, double batch_time) {
  const double dt = ou_step_size(spec);
  BatchCovariance bc(spec.modes, static_cast<std::uint64_t>(std::max(1.0, std::round(batch_time / dt))));
  simulate_ou(spec, cp, [&](double, const Eigen::VectorXd& y) { bc.add(y); });
  return bc.estimate();
}

}  // namespace

OuReport ou_experiment(const OuExperiment& e) {
  const int modes = e.modes;
  const ContinuumProfile cp = ContinuumProfile::stationary(e.bp);
  const Eigen::MatrixXd b = noise_covariance(modes, cp, 0.0);
  const Eigen::MatrixXd sigma = lyapunov_stationary(b);
  OuReport rep;
  rep.lyapunov_vs_closed_form = (sigma - stationary_covariance_matrix(modes, e.bp)).cwiseAbs().maxCoeff();
  rep.lyapunov_residual = lyapunov_residual(sigma, b);

  OuSpec spec;
  spec.modes = modes;
  spec.dt = e.dt > 0.0 ? e.dt : 0.1 / mode_eigenvalue(modes);
  spec.t_final = e.t_final;
  spec.burn_in = e.burn_in;
  spec.seed = e.seed;
  spec.start = OuStart::Stationary;
  rep.dt = ou_step_size(spec);
  const CovarianceEstimate em = ou_long_run(spec, cp, e.batch_time);
  const int cm = std::min(e.check_modes, modes);
  for (int j = 1; j <= cm; ++j)
    for (int k = j; k <= cm; ++k) {
      rep.euler_rows.push_back(make_row(0.0, j, k, em.cov(j - 1, k - 1), em.se(j - 1, k - 1), sigma(j - 1, k - 1), 0.0));
      rep.euler_ok = rep.euler_ok && rep.euler_rows.back().within;
    }

  spec.stepper = OuStepper::Exact;
  spec.auto_shrink = false;
  spec.dt = 5e-4;
  spec.seed = e.seed + 1;
  const CovarianceEstimate ex = ou_long_run(spec, cp, e.batch_time);
  for (int j = 1; j <= modes; ++j)
    for (int k = j; k <= modes; ++k) {
      rep.exact_rows.push_back(make_row(0.0, j, k, ex.cov(j - 1, k - 1), ex.se(j - 1, k - 1), sigma(j - 1, k - 1), 0.0));
      rep.exact_ok = rep.exact_ok && rep.exact_rows.back().within;
    }
  return rep;
}

OuBiasReport ou_bias_experiment(int modes, const BoundaryParams& bp, double t_final, std::uint64_t seed) {
  const ContinuumProfile cp = ContinuumProfile::stationary(bp);
  const Eigen::MatrixXd b = noise_covariance(modes, cp, 0.0);
  const Eigen::MatrixXd sigma = lyapunov_stationary(b);
  const int m = modes - 1;
  OuBiasReport rep;
  rep.mode = modes;
  rep.dt = 0.1 / mode_eigenvalue(modes);
  auto measure = [&](double dt, std::uint64_t s, double& bias, double& se, double& predicted) {
    OuSpec spec;
    spec.modes = modes;
    spec.dt = dt;
    spec.t_final = t_final;
    spec.burn_in = 1.0;
    spec.seed = s;
    spec.start = OuStart::Stationary;
    const CovarianceEstimate est = ou_long_run(spec, cp, 2.0);
    bias = est.cov(m, m) - sigma(m, m);
    se = est.se(m, m);
    predicted = euler_stationary_covariance(b, ou_step_size(spec))(m, m) - sigma(m, m);
  };
  measure(rep.dt, seed, rep.bias_dt, rep.se_dt, rep.predicted_dt);
  measure(rep.dt / 2.0, seed + 1, rep.bias_half, rep.se_half, rep.predicted_half);
  rep.detected = rep.bias_dt > 4.0 * rep.se_dt;
  rep.halves = std::abs(rep.bias_dt - 2.0 * rep.bias_half) <=
               4.0 * std::sqrt(rep.se_dt * rep.se_dt + 4.0 * rep.se_half * rep.se_half);
  return rep;
}

// ---------------------------------------------------------------------------

CriterionResult criterion_exact_correlations() {
  auto r = make_criterion(1, "exact stationary correlations", CriterionKind::Numerical);
  const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  double profile_err = 0.0, signed_err = 0.0;
  int sigma = 0;
  bool uniform = true;
  int cases = 0;
  for (int n = 2; n <= 12; ++n)
    for (double a : grid)
      for (double b : grid) {
        const ExactCheck c = exact_check(n, BoundaryParams::make(a, b));
        ++cases;
        profile_err = std::max(profile_err, c.profile_error);
        signed_err = std::max(signed_err, c.signed_error);
        uniform = uniform && c.sign_uniform;
        if (c.sign != 0) {
          if (sigma == 0) sigma = c.sign;
          if (c.sign != sigma) uniform = false;
        }
      }
  r.passed = profile_err <= 1e-12 && signed_err <= 1e-10 && uniform && sigma != 0;
  r.metrics = {{"cases", cases},
               {"sigma", sigma},
               {"sign_uniform", uniform},
               {"max_profile_error", profile_err},
               {"max_two_point_error", signed_err}};
  r.summary = "sigma=" + std::to_string(sigma) + " profile_err=" + fmt(profile_err) +
              " two_point_err=" + fmt(signed_err) + " over " + std::to_string(cases) + " cases";
  return r;
}

CriterionResult criterion_green_function() {
  auto r = make_criterion(2, "green function", CriterionKind::Numerical);
  double err = 0.0, worst_ratio = 0.0, linearity = 0.0;
  for (int n : {8, 16, 32, 64}) {
    const GreenCheck g1 = green_check(n, 1.0);
    const GreenCheck g2 = green_check(n, 2.0);
    err = std::max({err, g1.closed_form_error, g2.closed_form_error});
    worst_ratio = std::max({worst_ratio, g1.maximum / g1.bound, g2.maximum / g2.bound});
    const TriangleField a = solve_green_triangle(n, 1.0), b = solve_green_triangle(n, 2.0);
    for (std::size_t i = 0; i < a.data().size(); ++i)
      linearity = std::max(linearity, std::abs(b.data()[i] - 2.0 * a.data()[i]));
  }
  r.passed = err <= 1e-8 && worst_ratio <= 1.0 + 1e-12;
  r.metrics = {{"max_closed_form_error", err}, {"max_over_bound", worst_ratio}, {"linearity_error", linearity}};
  r.summary = "closed_form_err=" + fmt(err) + " max/bound=" + fmt(worst_ratio) + " linearity_err=" + fmt(linearity);
  return r;
}

CriterionResult criterion_equilibrium_fluctuations(const AcceptanceOptions& o) {
  auto r = make_criterion(3, "equilibrium fluctuations", CriterionKind::Statistical);
  StationaryCovExperiment e;
  e.n = 100;
  e.bp = BoundaryParams::make(0.5, 0.5);
  e.modes = 4;
  e.replicas = 20000;
  e.burn_in = 1.0;
  e.seed = o.seed;
  e.workers = o.workers;
  const StationaryCovReport rep = stationary_cov_experiment(e);
  r.passed = rep.covariance_ok;
  r.metrics = {{"rows", covariance_json(rep.rows)}, {"max_abs_z", max_abs_z(rep.rows)}, {"events", rep.events}};
  r.summary = "max|z|=" + fmt(max_abs_z(rep.rows)) + " outside=" + std::to_string(count_outside(rep.rows)) + "/" +
              std::to_string(rep.rows.size());
  return r;
}

CriterionResult criterion_stationary_fluctuations(const AcceptanceOptions& o) {
  auto r = make_criterion(4, "nonequilibrium stationary fluctuations", CriterionKind::Statistical);
  StationaryCovExperiment e;
  e.n = 128;
  e.bp = BoundaryParams::make(0.1, 0.9);
  e.modes = 4;
  e.replicas = 20000;
  e.burn_in = 1.0;
  e.seed = o.seed + 1;
  e.workers = o.workers;
  e.allowance = 0.02;
  const StationaryCovReport rep = stationary_cov_experiment(e);
  r.passed = rep.covariance_ok && rep.gaussian_ok;
  double gz = 0.0;
  for (const auto& m : rep.gaussianity)
    gz = std::max({gz, std::abs(m["z_skewness"].get<double>()), std::abs(m["z_kurtosis"].get<double>())});
  r.metrics = {{"rows", covariance_json(rep.rows)},
               {"max_abs_z", max_abs_z(rep.rows)},
               {"gaussianity", rep.gaussianity},
               {"max_gaussian_z", gz},
               {"events", rep.events}};
  r.summary = "max|z|=" + fmt(max_abs_z(rep.rows)) + " outside=" + std::to_string(count_outside(rep.rows)) + "/" +
              std::to_string(rep.rows.size()) + " gaussian max|z|=" + fmt(gz);
  return r;
}

CriterionResult criterion_relaxation(const AcceptanceOptions& o) {
  auto r = make_criterion(5, "relaxation from a product measure", CriterionKind::Statistical);
  RelaxExperiment e;
  e.n = 128;
  e.bp = BoundaryParams::make(0.1, 0.9);
  e.modes = 3;
  e.replicas = 20000;
  e.times = {0.05, 0.1, 0.2};
  e.seed = o.seed + 2;
  e.workers = o.workers;
  const RelaxReport rep = relax_experiment(e);
  r.passed = rep.covariance_ok && rep.profile_ok;
  r.metrics = {{"rows", covariance_json(rep.rows)},
               {"max_abs_z", max_abs_z(rep.rows)},
               {"max_profile_z", rep.max_profile_z},
               {"events", rep.events}};
  r.summary = "cov max|z|=" + fmt(max_abs_z(rep.rows)) + " outside=" + std::to_string(count_outside(rep.rows)) + "/" +
              std::to_string(rep.rows.size()) + " profile max|z|=" + fmt(rep.max_profile_z);
  return r;
}

CriterionResult criterion_ou_consistency(const AcceptanceOptions& o) {
  auto r = make_criterion(6, "OU consistency", CriterionKind::Statistical);
  double lyap = 0.0, resid = 0.0;
  for (auto bp : {BoundaryParams::make(0.0, 1.0), BoundaryParams::make(0.1, 0.9)}) {
    const Eigen::MatrixXd b = noise_covariance(16, ContinuumProfile::stationary(bp), 0.0);
    const Eigen::MatrixXd s = lyapunov_stationary(b);
    lyap = std::max(lyap, (s - stationary_covariance_matrix(16, bp)).cwiseAbs().maxCoeff());
    resid = std::max(resid, lyapunov_residual(s, b));
  }
  OuExperiment e;
  e.bp = BoundaryParams::make(0.1, 0.9);
  e.seed = o.seed + 3;
  e.dt = 2.5e-6;
  e.t_final = 200.0;
  e.batch_time = 2.0;
  const OuReport rep = ou_experiment(e);
  const OuBiasReport bias = ou_bias_experiment(16, e.bp, 200.0, o.seed + 5);
  const bool lyap_ok = lyap <= 1e-6 && resid <= 1e-12;
  r.passed = lyap_ok && rep.euler_ok && rep.exact_ok && bias.detected && bias.halves;
  r.metrics = {{"lyapunov_vs_closed_form", lyap},
               {"lyapunov_residual", resid},
               {"dt", rep.dt},
               {"euler_rows", covariance_json(rep.euler_rows)},
               {"euler_max_abs_z", max_abs_z(rep.euler_rows)},
               {"euler_outside", count_outside(rep.euler_rows)},
               {"exact_max_abs_z", max_abs_z(rep.exact_rows)},
               {"exact_outside", count_outside(rep.exact_rows)},
               {"bias", {{"mode", bias.mode},
                         {"dt", bias.dt},
                         {"bias_dt", bias.bias_dt},
                         {"se_dt", bias.se_dt},
                         {"bias_half", bias.bias_half},
                         {"se_half", bias.se_half},
                         {"predicted_dt", bias.predicted_dt},
                         {"predicted_half", bias.predicted_half},
                         {"detected", bias.detected},
                         {"halves", bias.halves}}}};
  r.summary = "lyapunov_err=" + fmt(lyap) + " EM max|z|=" + fmt(max_abs_z(rep.euler_rows)) +
              " exact max|z|=" + fmt(max_abs_z(rep.exact_rows)) + " bias " + fmt(bias.bias_dt) + " -> " +
              fmt(bias.bias_half) + " (ratio " + fmt(bias.bias_dt / bias.bias_half) + ")";
  return r;
}

CriterionResult criterion_maximum_principles(const AcceptanceOptions& o) {
  auto r = make_criterion(7, "maximum principles and bounds", CriterionKind::Numerical);
  RandomStream rng(o.seed, 0, 7);
  constexpr int kInputs = 100;

  int heat_fail = 0;
  for (int i = 0; i < kInputs; ++i) {
    const int n = 8 + static_cast<int>(rng.below(57));
    const BoundaryParams bp = random_boundary(rng);
    const Profile1D p0 = random_lipschitz_profile(n, bp, 0.5 + 10.0 * rng.uniform(), rng);
    std::vector<double> taus(20);
    for (auto& t : taus) t = 2.0 * rng.uniform();
    std::sort(taus.begin(), taus.end());
    if (!gradient_maxprinciple_check(p0, taus, 1e-9).holds) ++heat_fail;
  }

  int parabolic_fail = 0;
  double parabolic_excess = -INFINITY;
  for (int i = 0; i < kInputs; ++i) {
    const int n = 20;
    TriangleField h(n);
    for (auto& v : h.data()) v = 2.0 * rng.uniform() - 1.0;
    ParabolicOptions opt;
    opt.refine = false;
    opt.initial_steps = 200;
    const double tau = 0.01 + 0.5 * rng.uniform();
    const auto sol = solve_parabolic_triangle(h, [n](double) { return DiagonalSource(n); }, tau, opt);
    const double excess = std::max(sol.max_value - h.max_value(), sol.sup_norm - h.sup_norm());
    parabolic_excess = std::max(parabolic_excess, excess);
    if (excess > 1e-9) ++parabolic_fail;
  }

  int green_fail = 0;
  double green_ratio = 0.0;
  for (int i = 0; i < kInputs; ++i) {
    const int n = 3 + static_cast<int>(rng.below(62));
    const double c = 5.0 * rng.uniform_pos();
    const GreenCheck g = green_check(n, c);
    green_ratio = std::max(green_ratio, g.maximum / g.bound);
    if (g.maximum > g.bound * (1.0 + 1e-12) || g.closed_form_error > 1e-8) ++green_fail;
  }

  int prop_fail = 0, prop_cases = 0;
  double prop_ratio = 0.0;
  for (int n : {16, 32, 64}) {
    for (int i = 0; i < 34; ++i) {
      const BoundaryParams bp = random_boundary(rng);
      const Profile1D p0 = random_lipschitz_profile(n, bp, 0.5 + 4.0 * rng.uniform(), rng);
      TriangleField h(n);
      const double scale = 2.0 * rng.uniform() / n;
      for (auto& v : h.data()) v = scale * (2.0 * rng.uniform() - 1.0);
      const double tau = 0.02 + 0.2 * rng.uniform();
      const CorrelationEvolution ce = correlation_evolution(h, p0, tau);
      ++prop_cases;
      prop_ratio = std::max(prop_ratio, ce.solution.sup_norm / ce.bound);
      if (!ce.bound_holds) ++prop_fail;
    }
  }

  r.passed = heat_fail == 0 && parabolic_fail == 0 && green_fail == 0 && prop_fail == 0;
  r.metrics = {{"inputs_per_suite", kInputs},
               {"gradient_failures", heat_fail},
               {"parabolic_failures", parabolic_fail},
               {"parabolic_max_excess", parabolic_excess},
               {"green_failures", green_fail},
               {"green_max_over_bound", green_ratio},
               {"correlation_bound_cases", prop_cases},
               {"correlation_bound_failures", prop_fail},
               {"correlation_max_over_bound", prop_ratio}};
  r.summary = "failures gradient/parabolic/green/bound = " + std::to_string(heat_fail) + "/" +
              std::to_string(parabolic_fail) + "/" + std::to_string(green_fail) + "/" + std::to_string(prop_fail) +
              ", max sup/bound=" + fmt(prop_ratio);
  return r;
}

CriterionResult criterion_martingale(const AcceptanceOptions& o) {
  auto r = make_criterion(8, "martingale structure", CriterionKind::Statistical);
  MartingaleSpec s;
  s.n = 128;
  s.bp = BoundaryParams::make(0.1, 0.9);
  s.initial = InitialCondition::Product;
  s.gamma = quadratic_profile(s.bp);
  s.t_final = 0.5;
  s.dt_record = 0.05;
  s.replicas = 1000;
  s.modes = 4;
  s.seed = o.seed + 4;
  s.workers = o.workers;
  const MartingalePaths paths = record_martingale_paths(s);
  const MartingaleReport rep = martingale_diagnostic(paths, s.n);
  r.passed = rep.passed();
  double share = 0.0;
  for (double b : rep.boundary_share) share = std::max(share, b);
  r.metrics = {{"max_increment_z", rep.max_increment_z},
               {"max_final_z", rep.max_final_z},
               {"qv_ratio", rep.qv_ratio},
               {"second_moment_ratio", rep.second_moment_ratio},
               {"second_moment_se", rep.second_moment_se},
               {"boundary_share", rep.boundary_share},
               {"boundary_share_bound", rep.boundary_share_bound},
               {"events", paths.events}};
  r.summary = "increment max|z|=" + fmt(rep.max_increment_z) + " qv max dev=" + fmt(rep.max_qv_deviation()) +
              " boundary share=" + fmt(share) + " (bound " + fmt(rep.boundary_share_bound) + ")";
  return r;
}

CriterionResult criterion_spectral_identities() {
  auto r = make_criterion(9, "spectral identities", CriterionKind::Numerical);
  RandomStream rng(9, 0, 9);
  double semigroup = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ModeVector v(32);
    for (auto& c : v.coeffs) c = 2.0 * rng.uniform() - 1.0;
    const double t = 0.1 * rng.uniform(), s = 0.1 * rng.uniform();
    const ModeVector a = semigroup_apply(t, semigroup_apply(s, v));
    const ModeVector b = semigroup_apply(t + s, v);
    for (int n = 1; n <= 32; ++n) semigroup = std::max(semigroup, std::abs(a(n) - b(n)));
  }
  const Eigen::MatrixXd gram = SineBasis(64).gram(UnitQuadrature(8));
  const double ortho = (gram - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff();
  bool inverse_exact = true;
  for (int n = 1; n <= 64; ++n) {
    const ModeVector w = inverse_laplacian(ModeVector::unit(64, n));
    for (int m = 1; m <= 64; ++m)
      if (w(m) != (m == n ? 1.0 / mode_eigenvalue(n) : 0.0)) inverse_exact = false;
  }
  double closed = 0.0;
  for (auto bp : {BoundaryParams::make(0.0, 1.0), BoundaryParams::make(0.1, 0.9), BoundaryParams::make(0.3, 0.3),
                  BoundaryParams::make(0.7, 0.2), BoundaryParams::make(1.0, 0.0)})
    for (int j = 1; j <= 8; ++j)
      for (int k = j; k <= 8; ++k)
        closed = std::max(closed, std::abs(stationary_covariance(j, k, bp) - stationary_covariance_quadrature(j, k, bp)));
  r.passed = semigroup <= 1e-14 && ortho <= 1e-10 && inverse_exact && closed <= 1e-10;
  r.metrics = {{"semigroup_error", semigroup},
               {"orthonormality_error", ortho},
               {"inverse_laplacian_exact", inverse_exact},
               {"closed_form_vs_quadrature", closed}};
  r.summary = "semigroup=" + fmt(semigroup) + " ortho=" + fmt(ortho) +
              " inverse_exact=" + (inverse_exact ? "yes" : "no") + " closed_vs_quad=" + fmt(closed);
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o, const std::vector<int>& ids) {
  std::vector<int> wanted = ids;
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<CriterionResult> out;
  for (int id : wanted) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult c;
    try {
      switch (id) {
        case 1: c = criterion_exact_correlations(); break;
        case 2: c = criterion_green_function(); break;
        case 3: c = criterion_equilibrium_fluctuations(o); break;
        case 4: c = criterion_stationary_fluctuations(o); break;
        case 5: c = criterion_relaxation(o); break;
        case 6: c = criterion_ou_consistency(o); break;
        case 7: c = criterion_maximum_principles(o); break;
        case 8: c = criterion_martingale(o); break;
        case 9: c = criterion_spectral_identities(); break;
        default: throw ConfigError("unknown criterion " + std::to_string(id));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      c = make_criterion(id, "criterion " + std::to_string(id), CriterionKind::Numerical);
      c.summary = std::string("error: ") + ex.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace ssep
