#include "ssep/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/parallel.hpp"
#include "ssep/spectral.hpp"

namespace ssep {

FieldProjector::FieldProjector(int n, int modes) : n_(n), modes_(modes) {
  if (n < 2) throw ConfigError("field projection needs N >= 2");
  if (modes < 1) throw ConfigError("field projection needs at least one mode");
  table_.resize(static_cast<std::size_t>(modes) * (n - 1));
  for (int j = 1; j <= modes; ++j)
    for (int x = 1; x < n; ++x)
      table_[static_cast<std::size_t>(j - 1) * (n - 1) + (x - 1)] = sine_mode(j, static_cast<double>(x) / n);
}

FieldSample FieldProjector::project(const LatticeConfig& config, const Profile1D& centering, double time) const {
  if (config.n() != n_ || centering.n() != n_) throw ConfigError("field projection size mismatch");
  FieldSample s{time, std::vector<double>(static_cast<std::size_t>(modes_), 0.0)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  for (int j = 1; j <= modes_; ++j) {
    const double* row = &table_[static_cast<std::size_t>(j - 1) * (n_ - 1)];
    double acc = 0.0;
    for (int x = 1; x < n_; ++x) acc += row[x - 1] * (config[x] - centering[x]);
    s.y[static_cast<std::size_t>(j - 1)] = scale * acc;
  }
  return s;
}

FieldSample project_field(const LatticeConfig& config, const Profile1D& centering, int modes, double time) {
  return FieldProjector(config.n(), modes).project(config, centering, time);
}

void EnsembleSpec::validate() const {
  if (n < 2) throw ConfigError("ensemble needs N >= 2");
  BoundaryParams::make(bp.alpha, bp.beta);
  if (replicas < 2) throw ConfigError("ensemble needs at least 2 replicas");
  if (modes < 1) throw ConfigError("ensemble needs at least one mode");
  if (times.empty()) throw ConfigError("ensemble needs at least one observation time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw ConfigError("observation times must be nonnegative");
    if (i > 0 && times[i] < times[i - 1]) throw ConfigError("observation times must be sorted");
  }
  if (!(burn_in >= 0.0)) throw ConfigError("burn-in must be nonnegative");
  if (initial == InitialCondition::Product && !gamma) throw ConfigError("product initial condition needs a profile");
  if (single_chain && (initial != InitialCondition::StationaryBurnIn || times.size() != 1 || !(times[0] > 0.0)))
    throw ConfigError("single-chain mode needs the stationary start and one positive sampling interval");
  if (workers < 1) throw ConfigError("worker count must be positive");
}

namespace {

struct WorkerTally {
  std::vector<std::vector<std::uint64_t>> occupied;
  std::vector<std::vector<std::uint64_t>> pairs;
  std::uint64_t events = 0;
};

void tally(WorkerTally& w, std::size_t ti, const LatticeConfig& c, bool pairs, const TriangleField& layout) {
  const int n = c.n();
  auto& occ = w.occupied[ti];
  for (int x = 1; x < n; ++x) occ[static_cast<std::size_t>(x - 1)] += c[x];
  if (!pairs) return;
  auto& pr = w.pairs[ti];
  for (int x = 1; x <= n - 2; ++x) {
    if (!c[x]) continue;
    for (int y = x + 1; y <= n - 1; ++y) pr[layout.index(x, y)] += c[y];
  }
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const std::size_t nt = spec.times.size();
  const bool stationary = spec.initial == InitialCondition::StationaryBurnIn;
  const double n2 = static_cast<double>(n) * n;

  const Profile1D start = stationary ? Profile1D::linear(n, spec.bp) : Profile1D::from_function(n, spec.bp, spec.gamma);
  EnsembleResult res;
  res.times = spec.times;
  res.n = n;
  res.replicas = spec.replicas;
  if (stationary) {
    res.centering.assign(nt, start);
  } else {
    const HeatSolver1D heat(start);
    for (double t : spec.times) res.centering.push_back(heat.at(t));
  }
  res.samples.assign(nt, std::vector<FieldSample>(static_cast<std::size_t>(spec.replicas)));

  const FieldProjector proj(n, spec.modes);
  const TriangleField layout(n);
  const int workers = spec.single_chain ? 1 : spec.workers;
  std::vector<WorkerTally> tallies(static_cast<std::size_t>(workers));
  for (auto& t : tallies) {
    t.occupied.assign(nt, std::vector<std::uint64_t>(static_cast<std::size_t>(n - 1), 0));
    if (spec.record_pairs) t.pairs.assign(nt, std::vector<std::uint64_t>(layout.interior_size(), 0));
  }

  if (spec.single_chain) {
    RandomStream rng(spec.seed, 0);
    LatticeConfig c = sample_product(start, rng);
    auto& t = tallies[0];
    t.events += advance_uniformized(c, spec.bp, n2 * spec.burn_in, rng);
    for (int r = 0; r < spec.replicas; ++r) {
      if (r > 0) t.events += advance_uniformized(c, spec.bp, n2 * spec.times[0], rng);
      res.samples[0][static_cast<std::size_t>(r)] = proj.project(c, res.centering[0], spec.times[0] * r);
      tally(t, 0, c, spec.record_pairs, layout);
    }
  } else {
    parallel_for(static_cast<std::size_t>(spec.replicas), workers, [&](std::size_t r, int w) {
      RandomStream rng(spec.seed, r);
      LatticeConfig c = sample_product(start, rng);
      auto& t = tallies[static_cast<std::size_t>(w)];
      if (stationary) t.events += advance_uniformized(c, spec.bp, n2 * spec.burn_in, rng);
      double clock = 0.0;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        t.events += advance_uniformized(c, spec.bp, n2 * (spec.times[ti] - clock), rng);
        clock = spec.times[ti];
        res.samples[ti][r] = proj.project(c, res.centering[ti], spec.times[ti]);
        tally(t, ti, c, spec.record_pairs, layout);
      }
    });
  }

  res.occupied.assign(nt, std::vector<std::uint64_t>(static_cast<std::size_t>(n - 1), 0));
  if (spec.record_pairs) res.pairs.assign(nt, std::vector<std::uint64_t>(layout.interior_size(), 0));
  for (const auto& t : tallies) {
    res.events += t.events;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t i = 0; i < t.occupied[ti].size(); ++i) res.occupied[ti][i] += t.occupied[ti][i];
      if (spec.record_pairs)
        for (std::size_t i = 0; i < t.pairs[ti].size(); ++i) res.pairs[ti][i] += t.pairs[ti][i];
    }
  }
  return res;
}

Eigen::MatrixXd EnsembleResult::mode_matrix(std::size_t ti) const {
  const auto& s = samples.at(ti);
  const auto modes = static_cast<Eigen::Index>(s.front().y.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s.size()), modes);
  for (std::size_t r = 0; r < s.size(); ++r)
    for (Eigen::Index j = 0; j < modes; ++j) m(static_cast<Eigen::Index>(r), j) = s[r].y[static_cast<std::size_t>(j)];
  return m;
}

std::vector<double> EnsembleResult::mean_density(std::size_t ti) const {
  std::vector<double> out;
  for (auto c : occupied.at(ti)) out.push_back(static_cast<double>(c) / replicas);
  return out;
}

std::vector<double> EnsembleResult::mean_density_se(std::size_t ti) const {
  std::vector<double> out;
  for (auto c : occupied.at(ti)) {
    const double p = static_cast<double>(c) / replicas;
    out.push_back(std::sqrt(p * (1.0 - p) / (replicas - 1)));
  }
  return out;
}

TriangleField EnsembleResult::two_point(std::size_t ti) const {
  if (pairs.empty()) throw ConfigError("ensemble was run without pair tallies");
  const double r = replicas;
  TriangleField out(n);
  const auto& occ = occupied.at(ti);
  for (int x = 1; x <= n - 2; ++x) {
    for (int y = x + 1; y <= n - 1; ++y) {
      const double px = occ[static_cast<std::size_t>(x - 1)] / r;
      const double py = occ[static_cast<std::size_t>(y - 1)] / r;
      const double pxy = pairs[ti][out.index(x, y)] / r;
      out.set(x, y, (pxy - px * py) * r / (r - 1.0));
    }
  }
  return out;
}

TriangleField EnsembleResult::two_point_se(std::size_t ti) const {
  if (pairs.empty()) throw ConfigError("ensemble was run without pair tallies");
  const double r = replicas;
  TriangleField out(n);
  const auto& occ = occupied.at(ti);
  for (int x = 1; x <= n - 2; ++x) {
    for (int y = x + 1; y <= n - 1; ++y) {
      const double px = occ[static_cast<std::size_t>(x - 1)] / r;
      const double py = occ[static_cast<std::size_t>(y - 1)] / r;
      const double p11 = pairs[ti][out.index(x, y)] / r;
      const double p10 = px - p11, p01 = py - p11, p00 = 1.0 - px - py + p11;
      auto sq = [](double v) { return v * v; };
      const double m22 = p11 * sq((1 - px) * (1 - py)) + p10 * sq((1 - px) * py) + p01 * sq(px * (1 - py)) +
                         p00 * sq(px * py);
      const double c = p11 - px * py;
      out.set(x, y, std::sqrt(std::max(0.0, m22 - c * c) / r));
    }
  }
  return out;
}

CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& y) {
  const auto n = y.rows();
  const auto d = y.cols();
  if (n < 2) throw ConfigError("covariance estimate needs at least 2 samples");
  if (d < 1) throw ConfigError("covariance estimate needs at least one column");
  if (!y.allFinite()) throw ConfigError("covariance input has non-finite entries");
  CovarianceEstimate est;
  est.count = static_cast<std::size_t>(n);
  est.mean.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CompensatedSum s;
    for (Eigen::Index i = 0; i < n; ++i) s.add(y(i, j));
    est.mean(j) = s.value() / static_cast<double>(n);
  }
  est.cov.resize(d, d);
  est.se.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j; k < d; ++k) {
      CompensatedSum s1, s2;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = (y(i, j) - est.mean(j)) * (y(i, k) - est.mean(k));
        s1.add(p);
        s2.add(p * p);
      }
      const double biased = s1.value() / static_cast<double>(n);
      const double m22 = s2.value() / static_cast<double>(n);
      est.cov(j, k) = est.cov(k, j) = s1.value() / static_cast<double>(n - 1);
      est.se(j, k) = est.se(k, j) = std::sqrt(std::max(0.0, m22 - biased * biased) / static_cast<double>(n));
    }
  }
  return est;
}

CovarianceEstimate estimate_covariance(std::span<const FieldSample> samples) {
  if (samples.size() < 2) throw ConfigError("covariance estimate needs at least 2 samples");
  const auto d = static_cast<Eigen::Index>(samples.front().y.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (static_cast<Eigen::Index>(samples[i].y.size()) != d) throw ConfigError("samples differ in mode count");
    for (Eigen::Index j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), j) = samples[i].y[static_cast<std::size_t>(j)];
  }
  return estimate_covariance(m);
}

bool GaussianityReport::any_flagged() const {
  return std::any_of(modes.begin(), modes.end(), [](const ModeMoments& m) { return m.flagged; });
}

GaussianityReport gaussianity_check(const Eigen::MatrixXd& y, double threshold) {
  const double n = static_cast<double>(y.rows());
  if (y.rows() < 1000) throw ConfigError("gaussianity check needs at least 1000 samples");
  const double se_skew = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
  const double se_kurt = 2.0 * se_skew * std::sqrt((n * n - 1.0) / ((n - 3.0) * (n + 5.0)));
  GaussianityReport rep;
  rep.threshold = threshold;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    CompensatedSum s;
    for (Eigen::Index i = 0; i < y.rows(); ++i) s.add(y(i, j));
    const double mean = s.value() / n;
    CompensatedSum s2, s3, s4;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double d = y(i, j) - mean;
      s2.add(d * d);
      s3.add(d * d * d);
      s4.add(d * d * d * d);
    }
    const double m2 = s2.value() / n, m3 = s3.value() / n, m4 = s4.value() / n;
    ModeMoments mm;
    mm.mode = static_cast<int>(j) + 1;
    if (m2 > 0.0) {
      mm.skewness = m3 / std::pow(m2, 1.5);
      mm.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    mm.z_skewness = mm.skewness / se_skew;
    mm.z_kurtosis = (mm.excess_kurtosis + 6.0 / (n + 1.0)) / se_kurt;
    mm.flagged = std::abs(mm.z_skewness) > threshold || std::abs(mm.z_kurtosis) > threshold;
    rep.modes.push_back(mm);
  }
  return rep;
}

void write_samples_csv(std::ostream& os, const EnsembleResult& result) {
  CsvWriter w(os, {"replica", "time", "j", "value"});
  for (std::size_t ti = 0; ti < result.samples.size(); ++ti)
    for (std::size_t r = 0; r < result.samples[ti].size(); ++r) {
      const auto& s = result.samples[ti][r];
      for (std::size_t j = 0; j < s.y.size(); ++j) w.row(static_cast<long long>(r), s.time, static_cast<int>(j + 1), s.y[j]);
    }
}

}  // namespace ssep
