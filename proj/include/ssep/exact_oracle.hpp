#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>

#include "ssep/lattice_fields.hpp"

namespace ssep {

/// Largest system size for which the dense generator is built (8192 states).
inline constexpr int kExactMaxN = 14;

/// Dense rate matrix of the chain over all 2^{N-1} configurations. State s
/// encodes eta little-endian: bit (x-1) of s is eta(x).
struct DenseGenerator {
  int n = 0;
  BoundaryParams bp;
  Eigen::MatrixXd q;

  std::size_t states() const { return static_cast<std::size_t>(q.rows()); }
};

struct StationaryDistribution {
  int n = 0;
  BoundaryParams bp;
  Eigen::VectorXd probs;
  double residual = 0.0;  ///< max |(nu Q)_s|
};

DenseGenerator build_generator_dense(int n, const BoundaryParams& bp);

/// (L_N f)(eta) evaluated term by term from the three-part generator formula,
/// with f given as a table over state indices. Independent of the rate table
/// used by the simulator.
double apply_generator(int n, const BoundaryParams& bp, std::span<const double> f, std::uint64_t state);

/// Left null vector of Q normalised to a probability vector. Solved by dense LU
/// on Q^T with one equation replaced by the normalisation constraint.
StationaryDistribution stationary_distribution(const DenseGenerator& g);

/// E[eta(x)] for x = 1..N-1, with the reservoir densities at x = 0 and x = N.
Profile1D exact_profile(const StationaryDistribution& sd);

/// E[eta(x) eta(y)] - E[eta(x)] E[eta(y)] for 1 <= x < y <= N-1.
TriangleField exact_two_point(const StationaryDistribution& sd);

/// Product Bernoulli(gamma) probabilities over state indices.
Eigen::VectorXd product_measure(int n, double gamma);

/// CSV with header `state_bits,probability`; state_bits is the integer index.
void write_distribution_csv(std::ostream& os, const StationaryDistribution& sd);

}  // namespace ssep
