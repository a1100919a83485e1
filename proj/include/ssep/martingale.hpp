#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ssep/fluctuations.hpp"
#include "ssep/lattice_fields.hpp"

namespace ssep {

struct MartingaleSpec {
  int n = 128;
  BoundaryParams bp;
  InitialCondition initial = InitialCondition::Product;
  std::function<double(double)> gamma;
  double t_final = 0.5;    ///< diffusive
  double dt_record = 0.05;
  int replicas = 1000;
  int modes = 4;           ///< test functions e_1..e_J
  std::uint64_t seed = 0;
  double burn_in = 1.0;    ///< stationary start only
  int workers = 1;

  void validate() const;
  int grid_points() const;  ///< K + 1 recording times 0, dt, ..., K dt = t_final
};

/// Per-replica records on the grid t_k = k dt_record, k = 0..K, for modes j = 1..J:
/// Y_{t_k}(e_j) centred at the semidiscrete heat solution, and
/// int_0^{t_k} Y_s(Delta_N e_j) ds. Path functionals over [0, t_final]: the realized
/// quadratic variation sum (Delta Y)^2 over jumps and int Gamma ds split into bulk
/// and reservoir parts.
struct MartingalePaths {
  std::vector<double> grid;
  int replicas = 0;
  int modes = 0;
  std::vector<double> y;           ///< [replica][k][j]
  std::vector<double> integral_y;  ///< [replica][k][j]
  std::vector<double> qv;          ///< [replica][j]
  std::vector<double> gamma_bulk;  ///< [replica][j]
  std::vector<double> gamma_boundary;
  std::uint64_t events = 0;

  std::size_t at(int r, int k, int j) const {
    return (static_cast<std::size_t>(r) * grid.size() + static_cast<std::size_t>(k)) * static_cast<std::size_t>(modes) +
           static_cast<std::size_t>(j - 1);
  }
  std::size_t at(int r, int j) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(modes) + static_cast<std::size_t>(j - 1);
  }
  /// M_{t_k} = Y_{t_k} - Y_0 - int_0^{t_k} Y_s(Delta_N e_j) ds.
  double martingale(int r, int k, int j) const { return y[at(r, k, j)] - y[at(r, 0, j)] - integral_y[at(r, k, j)]; }
};

/// Runs the jump process replica by replica (RandomStream(seed, r)) and updates
/// the field, its drift and Gamma incrementally at every jump.
MartingalePaths record_martingale_paths(const MartingaleSpec& spec);

struct MartingaleReport {
  int n = 0;
  double max_increment_z = 0.0;          ///< over grid increments and modes
  double max_final_z = 0.0;              ///< mean of M_T over replicas, per mode
  std::vector<double> qv_ratio;          ///< sum_r QV / sum_r int Gamma, per mode
  std::vector<double> second_moment_ratio;  ///< E[M_T^2] / E[int Gamma], per mode
  std::vector<double> second_moment_se;
  std::vector<double> boundary_share;    ///< reservoir part of int Gamma, per mode
  double boundary_share_bound = 0.0;     ///< 5 / N

  double max_qv_deviation() const;
  bool passed(double z_threshold = 4.0, double qv_tolerance = 0.1) const;
};

MartingaleReport martingale_diagnostic(const MartingalePaths& paths, int n);

}  // namespace ssep
