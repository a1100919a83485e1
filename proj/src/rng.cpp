#include "ssep/rng.hpp"

#include <cmath>

namespace ssep {

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t tag)
    : seed_(master_seed), replica_(replica) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master_seed), hi(master_seed), lo(replica), hi(replica),
                    lo(tag),         hi(tag),         0x55535345u /* "SSEU" */};
  engine_.seed(seq);
}

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(engine_);
}

double RandomStream::exponential(double rate) { return -std::log(uniform_pos()) / rate; }

}  // namespace ssep
