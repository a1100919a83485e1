#include "ssep/triangle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ssep/errors.hpp"
#include "ssep/heat1d.hpp"

namespace ssep {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

Eigen::Map<const Eigen::VectorXd> view(const TriangleField& f) {
  return {f.data().data(), static_cast<Eigen::Index>(f.interior_size())};
}

double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

struct EulerPass {
  Eigen::VectorXd phi;
  double sup_norm = 0.0;
  double max_value = 0.0;
};

EulerPass implicit_euler(const TriangleField& h, const SpMat& a, const DiagonalSourcePath& g, double tau, int steps) {
  const int n = h.n();
  const Eigen::Index m = a.rows();
  const double dt = tau / steps;
  SpMat lhs(m, m);
  lhs.setIdentity();
  lhs += dt * a;
  Eigen::SimplicialLDLT<SpMat> solver(lhs);
  if (solver.info() != Eigen::Success) throw NumericalError("implicit Euler factorisation failed", NAN);

  // Superdiagonal positions in the packed layout.
  std::vector<Eigen::Index> diag_idx;
  for (int x = 1; x <= n - 2; ++x) diag_idx.push_back(static_cast<Eigen::Index>(h.index(x, x + 1)));

  EulerPass out;
  out.phi = view(h);
  out.sup_norm = out.phi.size() ? out.phi.cwiseAbs().maxCoeff() : 0.0;
  out.max_value = std::max(0.0, out.phi.size() ? out.phi.maxCoeff() : 0.0);
  Eigen::VectorXd rhs(m);
  for (int k = 1; k <= steps; ++k) {
    rhs = out.phi;
    if (g) {
      const DiagonalSource src = g(k * dt);
      for (int x = 1; x <= n - 2; ++x) rhs(diag_idx[x - 1]) += dt * src(x);
    }
    Eigen::VectorXd next = solver.solve(rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    const double residual = (lhs * next - rhs).cwiseAbs().maxCoeff() / scale;
    if (!(residual <= 1e-10)) throw NumericalError("implicit Euler step rejected", residual);
    out.phi.swap(next);
    out.sup_norm = std::max(out.sup_norm, out.phi.cwiseAbs().maxCoeff());
    out.max_value = std::max(out.max_value, out.phi.maxCoeff());
  }
  return out;
}

TriangleField to_field(int n, const Eigen::VectorXd& v) {
  TriangleField f(n);
  std::copy(v.data(), v.data() + v.size(), f.data().begin());
  return f;
}

}  // namespace

TriangleField laplacian_triangle(const TriangleField& f) {
  const int n = f.n();
  const double n2 = static_cast<double>(n) * n;
  TriangleField out(n);
  for (int x = 1; x <= n - 2; ++x) {
    for (int y = x + 1; y <= n - 1; ++y) {
      double v;
      if (y - x > 1) {
        v = f.at(x + 1, y) + f.at(x - 1, y) + f.at(x, y - 1) + f.at(x, y + 1) - 4.0 * f.at(x, y);
      } else {
        v = f.at(x - 1, x + 1) + f.at(x, x + 2) - 2.0 * f.at(x, x + 1);
      }
      out.set(x, y, n2 * v);
    }
  }
  return out;
}

SpMat negative_triangle_laplacian(int n) {
  if (n < 3) throw ConfigError("triangle operator needs N >= 3");
  const TriangleField layout(n);
  const double n2 = static_cast<double>(n) * n;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(layout.interior_size() * 5);
  auto couple = [&](Eigen::Index row, int x, int y) {
    if (x >= 1 && y <= n - 1 && x < y) trips.emplace_back(row, static_cast<Eigen::Index>(layout.index(x, y)), -n2);
  };
  for (int x = 1; x <= n - 2; ++x) {
    for (int y = x + 1; y <= n - 1; ++y) {
      const auto row = static_cast<Eigen::Index>(layout.index(x, y));
      if (y - x > 1) {
        trips.emplace_back(row, row, 4.0 * n2);
        couple(row, x + 1, y);
        couple(row, x - 1, y);
        couple(row, x, y - 1);
        couple(row, x, y + 1);
      } else {
        trips.emplace_back(row, row, 2.0 * n2);
        couple(row, x - 1, x + 1);
        couple(row, x, x + 2);
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(layout.interior_size());
  SpMat a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

TriangleField solve_green_triangle(int n, double c) {
  if (n < 3) throw ConfigError("Green solve needs N >= 3");
  TriangleField out(n);
  if (c == 0.0) return out;
  const SpMat a = negative_triangle_laplacian(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
  for (int x = 1; x <= n - 2; ++x) b(static_cast<Eigen::Index>(out.index(x, x + 1))) = c;

  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(static_cast<Eigen::Index>(20 * a.rows() + 100));
  cg.compute(a);
  const Eigen::VectorXd phi = cg.solve(b);
  const double rel = (a * phi - b).norm() / b.norm();
  if (cg.info() != Eigen::Success || !(rel <= 1e-10)) throw NumericalError("Green function CG solve failed", rel);
  return to_field(n, phi);
}

TriangleField green_closed_form(int n, double c) {
  const double nn = n;
  return TriangleField::from_function(n, [&](int x, int y) { return c / (nn - 1.0) * (x / nn) * (1.0 - y / nn); });
}

ParabolicSolution solve_parabolic_triangle(const TriangleField& h, const DiagonalSourcePath& g, double tau,
                                           const ParabolicOptions& options) {
  const int n = h.n();
  if (n < 3) throw ConfigError("parabolic triangle problem needs N >= 3");
  if (!(tau >= 0.0)) throw ConfigError("integration time must be nonnegative");
  if (options.initial_steps < 1) throw ConfigError("initial step count must be positive");
  ParabolicSolution sol{h};
  if (tau == 0.0) {
    sol.sup_norm = h.sup_norm();
    sol.max_value = h.max_value();
    return sol;
  }
  const SpMat a = negative_triangle_laplacian(n);

  int steps = options.initial_steps;
  EulerPass pass = implicit_euler(h, a, g, tau, steps);
  if (!options.refine) {
    sol.field = to_field(n, pass.phi);
    sol.sup_norm = pass.sup_norm;
    sol.max_value = pass.max_value;
    sol.steps = steps;
    return sol;
  }

  // Richardson table over halvings of the step; row i holds extrapolants of order 1..i+1.
  std::vector<std::vector<Eigen::VectorXd>> table{{pass.phi}};
  double change = INFINITY;
  for (int r = 1; r <= options.max_refinements; ++r) {
    steps *= 2;
    pass = implicit_euler(h, a, g, tau, steps);
    std::vector<Eigen::VectorXd> row{pass.phi};
    if (options.extrapolate) {
      for (std::size_t k = 1; k <= table.back().size(); ++k) {
        const double f = std::ldexp(1.0, static_cast<int>(k)) - 1.0;
        row.push_back(row[k - 1] + (row[k - 1] - table.back()[k - 1]) / f);
      }
    }
    change = sup_diff(row.back(), table.back().back());
    table.push_back(std::move(row));
    sol.refinements = r;
    if (change < options.tolerance) break;
  }
  if (!(change < options.tolerance)) throw NumericalError("parabolic refinement did not reach tolerance", change);

  sol.field = to_field(n, table.back().back());
  sol.sup_norm = pass.sup_norm;
  sol.max_value = pass.max_value;
  sol.steps = steps;
  sol.change = change;
  return sol;
}

CorrelationEvolution correlation_evolution(const TriangleField& h, const Profile1D& p0, double tau,
                                           const ParabolicOptions& options, double tolerance) {
  const int n = p0.n();
  if (h.n() != n) throw ConfigError("correlation and profile sizes differ");
  const HeatSolver1D heat(p0);
  const double nn = n;
  DiagonalSourcePath source = [&](double t) {
    const Profile1D rho = heat.at(t);
    DiagonalSource g(n);
    for (int x = 1; x <= n - 2; ++x) {
      const double grad = nn * (rho[x + 1] - rho[x]);
      g.set(x, -grad * grad);
    }
    return g;
  };
  CorrelationEvolution out{solve_parabolic_triangle(h, source, tau, options)};
  out.c0 = std::max(p0.max_gradient(), nn * h.sup_norm());
  out.bound = (2.0 * out.c0 + out.c0 * out.c0) / (2.0 * nn);
  out.bound_holds = out.solution.sup_norm <= out.bound + tolerance;
  return out;
}

}  // namespace ssep
