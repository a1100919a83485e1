#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ssep/lattice_fields.hpp"
#include "ssep/rng.hpp"

namespace ssep {

/// Occupancy eta(x) in {0,1} for the sites x = 1..N-1 of the open chain.
class LatticeConfig {
 public:
  /// Empty chain of size N (N >= 2).
  explicit LatticeConfig(int n);
  LatticeConfig(int n, std::vector<std::uint8_t> occ);

  /// Site x occupied iff bit (x-1) of `bits` is set.
  static LatticeConfig from_bits(int n, std::uint64_t bits);

  int n() const noexcept { return n_; }
  int sites() const noexcept { return n_ - 1; }

  /// eta(x) for x = 1..N-1 (unchecked).
  std::uint8_t operator[](int x) const { return occ_[static_cast<std::size_t>(x - 1)]; }
  std::uint8_t at(int x) const;
  void set(int x, std::uint8_t v);
  void flip(int x) { occ_[static_cast<std::size_t>(x - 1)] ^= 1u; }
  void swap_bond(int x) { std::swap(occ_[static_cast<std::size_t>(x - 1)], occ_[static_cast<std::size_t>(x)]); }

  std::span<const std::uint8_t> occupancy() const noexcept { return occ_; }
  int particle_count() const;

  /// Little-endian bit pattern (site 1 is bit 0); N-1 must be at most 63.
  std::uint64_t bits() const;

  bool operator==(const LatticeConfig&) const = default;

 private:
  int n_;
  std::vector<std::uint8_t> occ_;
};

enum class EventKind : std::uint8_t { Swap, LeftFlip, RightFlip };

/// A transition of the chain. For Swap, `site` is x of the bond (x, x+1);
/// flips carry their site (1 or N-1).
struct Event {
  EventKind kind;
  int site;

  bool operator==(const Event&) const = default;
};

struct RatedEvent {
  Event event;
  double rate;
};

/// Strictly positive transitions out of `config`: active bonds at rate 1 and
/// the two reservoir flips. An empty list means the state is absorbing.
std::vector<RatedEvent> event_rates(const LatticeConfig& config, const BoundaryParams& bp);

/// sigma^{x,x+1} eta or sigma^x eta.
LatticeConfig apply_event(LatticeConfig config, Event e);

/// Microscopic clock; diffusive time is micro / N^2.
class SimClock {
 public:
  explicit SimClock(int n) : n2_(static_cast<double>(n) * n) {}
  double micro_time() const noexcept { return micro_; }
  double diffusive_time() const noexcept { return micro_ / n2_; }
  void advance(double dt) { micro_ += dt; }
  void set_micro(double t) { micro_ = t; }

 private:
  double n2_;
  double micro_ = 0.0;
};

struct StepOutcome {
  Event event;
  double dt;  ///< microscopic holding time before the event
};

/// Gillespie simulator with an incrementally maintained rate table.
///
/// Active bonds (eta(x) != eta(x+1)) live in an indexed set; a swap or a flip
/// only changes the status of the neighbouring bonds, so each event costs O(1).
/// Inactive bonds are left out of the table entirely, which is equivalent in
/// law to including them as no-op events.
class KmcEngine {
 public:
  KmcEngine(LatticeConfig config, BoundaryParams bp);

  const LatticeConfig& config() const noexcept { return config_; }
  const BoundaryParams& boundary() const noexcept { return bp_; }
  const SimClock& clock() const noexcept { return clock_; }
  int n() const noexcept { return config_.n(); }

  double total_rate() const noexcept { return static_cast<double>(active_.size()) + left_rate() + right_rate(); }
  std::size_t active_bonds() const noexcept { return active_.size(); }
  double left_rate() const noexcept;
  double right_rate() const noexcept;

  /// One exact jump. Returns nullopt, leaving state and clock unchanged, when absorbing.
  std::optional<StepOutcome> step(RandomStream& rng);

  /// Advances to the microscopic time `horizon`. The event that would straddle the
  /// horizon is discarded (memorylessness makes this exact), so the state returned
  /// is the one in force at the horizon. `hold(state, duration)` is called for each
  /// holding interval before the state changes, `on_event(event)` after each jump.
  /// Returns false if an absorbing state was reached (the clock still ends at horizon).
  template <class Hold, class OnEvent>
  bool run_until(double horizon, RandomStream& rng, Hold&& hold, OnEvent&& on_event);

  bool run_until(double horizon, RandomStream& rng) {
    return run_until(horizon, rng, [](const LatticeConfig&, double) {}, [](const Event&) {});
  }

  std::uint64_t event_count() const noexcept { return events_; }

 private:
  Event pick(double u) const;
  void apply(Event e);
  void refresh_bond(int x);

  LatticeConfig config_;
  BoundaryParams bp_;
  SimClock clock_;
  std::vector<int> active_;    // bond indices x with eta(x) != eta(x+1)
  std::vector<int> position_;  // position_[x] in active_, or -1
  std::uint64_t events_ = 0;
};

/// One Gillespie step from `config`. nullopt signals an absorbing state.
std::optional<std::pair<LatticeConfig, double>> kmc_step(const LatticeConfig& config, const BoundaryParams& bp,
                                                         RandomStream& rng);

struct EvolveResult {
  LatticeConfig config;
  bool absorbed = false;
  std::uint64_t events = 0;
};

/// Runs the chain for diffusive time tau (microscopic time N^2 tau).
EvolveResult evolve(const LatticeConfig& config, const BoundaryParams& bp, double tau, RandomStream& rng);

/// Same law as KmcEngine through uniformization: every bond carries a rate-1
/// swap clock and each end site a rate-1 clock that redraws it from
/// Bernoulli(alpha) or Bernoulli(beta). The total rate is exactly N, so the
/// attempt count over microscopic time t is Poisson(N t) and no holding times
/// are drawn. Returns the number of attempts.
std::uint64_t advance_uniformized(LatticeConfig& config, const BoundaryParams& bp, double micro_time,
                                  RandomStream& rng);

/// Independent sites with P[eta(x) = 1] = profile(x).
LatticeConfig sample_product(const Profile1D& profile, RandomStream& rng);

/// Carré du champ of the field Y(H) split into its bulk and reservoir parts.
struct GammaTerms {
  double bulk = 0.0;
  double left = 0.0;
  double right = 0.0;
  double total() const { return bulk + left + right; }
};

/// Gamma = N^2 { L_N Y(H)^2 - 2 Y(H) L_N Y(H) } for a test function given on the
/// grid x/N, x = 0..N (N+1 values). Bulk terms use N^{-1} [eta(x+1)-eta(x)]^2
/// (grad_N H)(x/N)^2; each reservoir term is N^{-1} (grad_N H)^2 times the flip
/// rate, which equals (eta - alpha)^2 + alpha(1 - alpha) at the left end.
GammaTerms gamma_field(const LatticeConfig& config, const BoundaryParams& bp, std::span<const double> h_grid);
GammaTerms gamma_field(const LatticeConfig& config, const BoundaryParams& bp, const std::function<double(double)>& h);

// ---------------------------------------------------------------------------

inline double KmcEngine::left_rate() const noexcept {
  return config_[1] ? 1.0 - bp_.alpha : bp_.alpha;
}

inline double KmcEngine::right_rate() const noexcept {
  return config_[config_.n() - 1] ? 1.0 - bp_.beta : bp_.beta;
}

template <class Hold, class OnEvent>
bool KmcEngine::run_until(double horizon, RandomStream& rng, Hold&& hold, OnEvent&& on_event) {
  while (clock_.micro_time() < horizon) {
    const double rate = total_rate();
    if (rate <= 0.0) {
      hold(config_, horizon - clock_.micro_time());
      clock_.set_micro(horizon);
      return false;
    }
    const double dt = rng.exponential(rate);
    if (clock_.micro_time() + dt >= horizon) {
      hold(config_, horizon - clock_.micro_time());
      clock_.set_micro(horizon);
      return true;
    }
    hold(config_, dt);
    clock_.advance(dt);
    const Event e = pick(rng.uniform() * rate);
    apply(e);
    on_event(e);
  }
  return true;
}

}  // namespace ssep
