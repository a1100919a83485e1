#pragma once

#include <Eigen/SparseCore>
#include <functional>

#include "ssep/lattice_fields.hpp"

namespace ssep {

/// Delta_V^N applied pointwise: the 5-point stencil off the superdiagonal, the
/// 2-point stencil f(x-1,x+1) + f(x,x+2) - 2f(x,x+1) on it, both scaled by N^2,
/// with zero values on the absorbing boundary.
TriangleField laplacian_triangle(const TriangleField& f);

/// -Delta_V^N as a sparse symmetric positive definite matrix on the interior unknowns,
/// ordered as TriangleField::data().
Eigen::SparseMatrix<double> negative_triangle_laplacian(int n);

/// Solves -Delta_V^N phi = c * 1{y = x+1} with phi = 0 on the boundary
/// (preconditioned conjugate gradients, relative residual 1e-12).
TriangleField solve_green_triangle(int n, double c);

/// Closed form c/(N-1) * (x/N) * (1 - y/N).
TriangleField green_closed_form(int n, double c);

using DiagonalSourcePath = std::function<DiagonalSource(double)>;

struct ParabolicOptions {
  int initial_steps = 1000;
  double tolerance = 1e-8;  ///< sup-norm change between successive refinements
  int max_refinements = 6;
  bool refine = true;       ///< false: a single implicit Euler pass with initial_steps
  bool extrapolate = true;  ///< Richardson-extrapolate across refinements
};

struct ParabolicSolution {
  TriangleField field;
  double sup_norm = 0.0;  ///< max over all steps of ||phi_t||_inf, from the finest implicit Euler pass
  double max_value = 0.0; ///< max over all steps of max phi_t (boundary zero included)
  int steps = 0;
  int refinements = 0;
  double change = 0.0;    ///< sup-norm difference between the last two refinements
};

/// Integrates d/ds phi = Delta_V^N phi + g_s, phi_0 = h, zero on the boundary, up to tau
/// by implicit Euler. The implicit matrix I - dt Delta_V^N is factorised once per step
/// size. Step count doubles until successive (optionally extrapolated) solutions differ
/// by less than the tolerance; NumericalError if that never happens or a step's linear
/// residual exceeds 1e-10.
ParabolicSolution solve_parabolic_triangle(const TriangleField& h, const DiagonalSourcePath& g, double tau,
                                           const ParabolicOptions& options = {});

struct CorrelationEvolution {
  ParabolicSolution solution;
  double c0 = 0.0;     ///< max(max_x N|rho_0(x+1) - rho_0(x)|, N ||h||_inf)
  double bound = 0.0;  ///< (2 C0 + C0^2) / (2N)
  bool bound_holds = true;
};

/// Two-point function of the chain started from a measure with correlation h and mean
/// profile p0: source -(grad_N rho_t(x))^2 on the superdiagonal, rho_t from the exact
/// 1D heat solver.
CorrelationEvolution correlation_evolution(const TriangleField& h, const Profile1D& p0, double tau,
                                           const ParabolicOptions& options = {}, double tolerance = 1e-9);

}  // namespace ssep
