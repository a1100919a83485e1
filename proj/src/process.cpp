#include "ssep/process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssep/errors.hpp"

namespace ssep {

LatticeConfig::LatticeConfig(int n) : n_(n) {
  if (n < 2) throw ConfigError("lattice size N must be at least 2");
  occ_.assign(static_cast<std::size_t>(n - 1), 0);
}

LatticeConfig::LatticeConfig(int n, std::vector<std::uint8_t> occ) : n_(n), occ_(std::move(occ)) {
  if (n < 2) throw ConfigError("lattice size N must be at least 2");
  if (occ_.size() != static_cast<std::size_t>(n - 1)) throw ConfigError("occupancy must have N-1 entries");
  for (auto v : occ_)
    if (v > 1) throw ConfigError("occupancy entries must be 0 or 1");
}

LatticeConfig LatticeConfig::from_bits(int n, std::uint64_t bits) {
  if (n - 1 > 63) throw CapacityError("bit encoding supports at most 63 sites");
  LatticeConfig c(n);
  for (int x = 1; x < n; ++x) c.occ_[static_cast<std::size_t>(x - 1)] = static_cast<std::uint8_t>((bits >> (x - 1)) & 1u);
  return c;
}

std::uint8_t LatticeConfig::at(int x) const {
  if (x < 1 || x > n_ - 1) throw std::out_of_range("site index must be in 1..N-1");
  return occ_[static_cast<std::size_t>(x - 1)];
}

void LatticeConfig::set(int x, std::uint8_t v) {
  if (x < 1 || x > n_ - 1) throw std::out_of_range("site index must be in 1..N-1");
  if (v > 1) throw ConfigError("occupancy entries must be 0 or 1");
  occ_[static_cast<std::size_t>(x - 1)] = v;
}

int LatticeConfig::particle_count() const { return std::accumulate(occ_.begin(), occ_.end(), 0); }

std::uint64_t LatticeConfig::bits() const {
  if (n_ - 1 > 63) throw CapacityError("bit encoding supports at most 63 sites");
  std::uint64_t b = 0;
  for (std::size_t i = 0; i < occ_.size(); ++i) b |= static_cast<std::uint64_t>(occ_[i]) << i;
  return b;
}

std::vector<RatedEvent> event_rates(const LatticeConfig& config, const BoundaryParams& bp) {
  const int n = config.n();
  std::vector<RatedEvent> out;
  for (int x = 1; x <= n - 2; ++x)
    if (config[x] != config[x + 1]) out.push_back({{EventKind::Swap, x}, 1.0});
  const double left = config[1] ? 1.0 - bp.alpha : bp.alpha;
  const double right = config[n - 1] ? 1.0 - bp.beta : bp.beta;
  if (left > 0.0) out.push_back({{EventKind::LeftFlip, 1}, left});
  if (right > 0.0) out.push_back({{EventKind::RightFlip, n - 1}, right});
  return out;
}

LatticeConfig apply_event(LatticeConfig config, Event e) {
  switch (e.kind) {
    case EventKind::Swap:
      config.swap_bond(e.site);
      break;
    case EventKind::LeftFlip:
      config.flip(1);
      break;
    case EventKind::RightFlip:
      config.flip(config.n() - 1);
      break;
  }
  return config;
}

KmcEngine::KmcEngine(LatticeConfig config, BoundaryParams bp)
    : config_(std::move(config)), bp_(bp), clock_(config_.n()) {
  const int n = config_.n();
  position_.assign(static_cast<std::size_t>(n), -1);
  active_.reserve(static_cast<std::size_t>(n));
  for (int x = 1; x <= n - 2; ++x) refresh_bond(x);
}

void KmcEngine::refresh_bond(int x) {
  if (x < 1 || x > config_.n() - 2) return;
  const bool on = config_[x] != config_[x + 1];
  int& pos = position_[static_cast<std::size_t>(x)];
  if (on && pos < 0) {
    pos = static_cast<int>(active_.size());
    active_.push_back(x);
  } else if (!on && pos >= 0) {
    const int last = active_.back();
    active_[static_cast<std::size_t>(pos)] = last;
    position_[static_cast<std::size_t>(last)] = pos;
    active_.pop_back();
    pos = -1;
  }
}

Event KmcEngine::pick(double u) const {
  const auto nb = static_cast<double>(active_.size());
  if (u < nb) {
    const auto i = std::min(static_cast<std::size_t>(u), active_.size() - 1);
    return {EventKind::Swap, active_[i]};
  }
  u -= nb;
  const double left = left_rate();
  if (u < left || right_rate() <= 0.0) return {EventKind::LeftFlip, 1};
  return {EventKind::RightFlip, config_.n() - 1};
}

void KmcEngine::apply(Event e) {
  ++events_;
  switch (e.kind) {
    case EventKind::Swap:
      // The swapped bond stays active; only its neighbours can change status.
      config_.swap_bond(e.site);
      refresh_bond(e.site - 1);
      refresh_bond(e.site + 1);
      break;
    case EventKind::LeftFlip:
      config_.flip(1);
      refresh_bond(1);
      break;
    case EventKind::RightFlip:
      config_.flip(config_.n() - 1);
      refresh_bond(config_.n() - 2);
      break;
  }
}

std::optional<StepOutcome> KmcEngine::step(RandomStream& rng) {
  const double rate = total_rate();
  if (rate <= 0.0) return std::nullopt;
  const double dt = rng.exponential(rate);
  const Event e = pick(rng.uniform() * rate);
  clock_.advance(dt);
  apply(e);
  return StepOutcome{e, dt};
}

std::optional<std::pair<LatticeConfig, double>> kmc_step(const LatticeConfig& config, const BoundaryParams& bp,
                                                         RandomStream& rng) {
  KmcEngine engine(config, bp);
  auto out = engine.step(rng);
  if (!out) return std::nullopt;
  return std::make_pair(engine.config(), out->dt);
}

EvolveResult evolve(const LatticeConfig& config, const BoundaryParams& bp, double tau, RandomStream& rng) {
  if (!(tau >= 0.0)) throw ConfigError("evolution time must be nonnegative");
  KmcEngine engine(config, bp);
  const double n = config.n();
  const bool alive = engine.run_until(n * n * tau, rng);
  return {engine.config(), !alive, engine.event_count()};
}

std::uint64_t advance_uniformized(LatticeConfig& config, const BoundaryParams& bp, double micro_time,
                                  RandomStream& rng) {
  if (!(micro_time >= 0.0)) throw ConfigError("evolution time must be nonnegative");
  const int n = config.n();
  const std::uint64_t attempts = rng.poisson(static_cast<double>(n) * micro_time);
  const auto clocks = static_cast<std::uint64_t>(n);
  for (std::uint64_t i = 0; i < attempts; ++i) {
    // Clock 0 is the left site, N-1 the right site, 1..N-2 the bonds.
    const auto c = static_cast<int>(rng.below(clocks));
    if (c >= 1 && c <= n - 2) {
      config.swap_bond(c);
    } else if (c == 0) {
      const std::uint8_t v = rng.uniform() < bp.alpha ? 1 : 0;
      if (config[1] != v) config.flip(1);
    } else {
      const std::uint8_t v = rng.uniform() < bp.beta ? 1 : 0;
      if (config[n - 1] != v) config.flip(n - 1);
    }
  }
  return attempts;
}

LatticeConfig sample_product(const Profile1D& profile, RandomStream& rng) {
  const int n = profile.n();
  LatticeConfig c(n);
  for (int x = 1; x < n; ++x) {
    const double p = profile[x];
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("product profile values must lie in [0,1]");
    c.set(x, rng.uniform() < p ? 1 : 0);
  }
  return c;
}

GammaTerms gamma_field(const LatticeConfig& config, const BoundaryParams& bp, std::span<const double> h) {
  const int n = config.n();
  if (h.size() != static_cast<std::size_t>(n + 1)) throw ConfigError("test function grid must have N+1 values");
  const double nn = n;
  auto grad = [&](int x) { return nn * (h[static_cast<std::size_t>(x) + 1] - h[static_cast<std::size_t>(x)]); };
  GammaTerms g;
  for (int x = 1; x <= n - 2; ++x) {
    const double d = static_cast<double>(config[x + 1]) - config[x];
    const double gx = grad(x);
    g.bulk += d * d * gx * gx;
  }
  g.bulk /= nn;
  const double left_rate = config[1] ? 1.0 - bp.alpha : bp.alpha;
  const double right_rate = config[n - 1] ? 1.0 - bp.beta : bp.beta;
  const double g0 = grad(0);
  const double g1 = grad(n - 1);
  g.left = g0 * g0 * left_rate / nn;
  g.right = g1 * g1 * right_rate / nn;
  return g;
}

GammaTerms gamma_field(const LatticeConfig& config, const BoundaryParams& bp, const std::function<double(double)>& h) {
  const int n = config.n();
  std::vector<double> grid(static_cast<std::size_t>(n + 1));
  for (int x = 0; x <= n; ++x) grid[static_cast<std::size_t>(x)] = h(static_cast<double>(x) / n);
  return gamma_field(config, bp, grid);
}

}  // namespace ssep
