#pragma once

#include <cstdint>
#include <random>

namespace ssep {

/// Random stream keyed by (master seed, replica index).
///
/// Each key yields an independent Mersenne-Twister state seeded through
/// std::seed_seq, so a replica's draws depend only on its key and never on
/// which worker runs it or in which order replicas are scheduled.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t tag = 0);

  using result_type = std::uint64_t;
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n) by multiply-shift.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }
  double normal() { return normal_(engine_); }
  std::uint64_t poisson(double mean);

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t replica() const noexcept { return replica_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replica_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ssep
