#include "ssep/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "ssep/errors.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/parallel.hpp"
#include "ssep/process.hpp"
#include "ssep/spectral.hpp"

namespace ssep {

void MartingaleSpec::validate() const {
  if (n < 3) throw ConfigError("martingale run needs N >= 3");
  BoundaryParams::make(bp.alpha, bp.beta);
  if (!(t_final > 0.0) || !(dt_record > 0.0)) throw ConfigError("martingale times must be positive");
  const double k = t_final / dt_record;
  if (std::abs(k - std::round(k)) > 1e-9 * k) throw ConfigError("t_final must be a multiple of dt_record");
  if (replicas < 2) throw ConfigError("martingale run needs at least 2 replicas");
  if (modes < 1) throw ConfigError("martingale run needs at least one mode");
  if (initial == InitialCondition::Product && !gamma) throw ConfigError("product initial condition needs a profile");
  if (!(burn_in >= 0.0)) throw ConfigError("burn-in must be nonnegative");
  if (workers < 1) throw ConfigError("worker count must be positive");
}

int MartingaleSpec::grid_points() const { return static_cast<int>(std::lround(t_final / dt_record)) + 1; }

namespace {

// Test-function tables for one mode on x = 0..N.
struct ModeTables {
  std::vector<double> h;     // e_j(x/N), zero at both ends
  std::vector<double> lap;   // (Delta_N h)(x), x = 1..N-1, stored at index x
  std::vector<double> grad2; // (N (h(x+1) - h(x)))^2, x = 0..N-1
};

ModeTables make_tables(int n, int j) {
  ModeTables t;
  const double nn = n;
  t.h.assign(static_cast<std::size_t>(n + 1), 0.0);
  for (int x = 1; x < n; ++x) t.h[static_cast<std::size_t>(x)] = sine_mode(j, x / nn);
  t.lap.assign(static_cast<std::size_t>(n + 1), 0.0);
  for (int x = 1; x < n; ++x) {
    const auto i = static_cast<std::size_t>(x);
    t.lap[i] = nn * nn * (t.h[i + 1] + t.h[i - 1] - 2.0 * t.h[i]);
  }
  t.grad2.assign(static_cast<std::size_t>(n), 0.0);
  for (int x = 0; x < n; ++x) {
    const auto i = static_cast<std::size_t>(x);
    const double g = nn * (t.h[i + 1] - t.h[i]);
    t.grad2[i] = g * g;
  }
  return t;
}

struct ModeState {
  double a = 0.0;       // N^{-1/2} sum h eta
  double b = 0.0;       // N^{-1/2} sum lap eta
  double bulk = 0.0;    // bulk Gamma
  double int_b = 0.0;
  double int_bulk = 0.0;
  double int_boundary = 0.0;
  double qv = 0.0;
};

}  // namespace

MartingalePaths record_martingale_paths(const MartingaleSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int modes = spec.modes;
  const int kpts = spec.grid_points();
  const double nn = n;
  const double n2 = nn * nn;
  const double scale = 1.0 / std::sqrt(nn);
  const bool stationary = spec.initial == InitialCondition::StationaryBurnIn;

  const Profile1D start =
      stationary ? Profile1D::linear(n, spec.bp) : Profile1D::from_function(n, spec.bp, spec.gamma);
  const HeatSolver1D heat(start);

  std::vector<ModeTables> tab;
  for (int j = 1; j <= modes; ++j) tab.push_back(make_tables(n, j));

  MartingalePaths out;
  out.replicas = spec.replicas;
  out.modes = modes;
  for (int k = 0; k < kpts; ++k) out.grid.push_back(k * spec.dt_record);

  // Deterministic centring terms on the grid.
  std::vector<double> centre_y(static_cast<std::size_t>(kpts * modes));
  std::vector<double> centre_iy(static_cast<std::size_t>(kpts * modes));
  for (int k = 0; k < kpts; ++k) {
    const Profile1D rho = heat.at(out.grid[static_cast<std::size_t>(k)]);
    const Profile1D irho = heat.integral(out.grid[static_cast<std::size_t>(k)]);
    for (int j = 1; j <= modes; ++j) {
      double cy = 0.0, ciy = 0.0;
      const auto& t = tab[static_cast<std::size_t>(j - 1)];
      for (int x = 1; x < n; ++x) {
        cy += t.h[static_cast<std::size_t>(x)] * rho[x];
        ciy += t.lap[static_cast<std::size_t>(x)] * irho[x];
      }
      centre_y[static_cast<std::size_t>(k * modes + j - 1)] = scale * cy;
      centre_iy[static_cast<std::size_t>(k * modes + j - 1)] = scale * ciy;
    }
  }

  const std::size_t per_rep = static_cast<std::size_t>(kpts) * static_cast<std::size_t>(modes);
  out.y.assign(per_rep * static_cast<std::size_t>(spec.replicas), 0.0);
  out.integral_y.assign(out.y.size(), 0.0);
  out.qv.assign(static_cast<std::size_t>(spec.replicas * modes), 0.0);
  out.gamma_bulk.assign(out.qv.size(), 0.0);
  out.gamma_boundary.assign(out.qv.size(), 0.0);
  std::vector<std::uint64_t> events(static_cast<std::size_t>(spec.workers), 0);

  parallel_for(static_cast<std::size_t>(spec.replicas), spec.workers, [&](std::size_t rep, int w) {
    const int r = static_cast<int>(rep);
    RandomStream rng(spec.seed, rep);
    KmcEngine engine(sample_product(start, rng), spec.bp);
    double base = 0.0;
    if (stationary) {
      base = n2 * spec.burn_in;
      engine.run_until(base, rng);
    }
    const std::uint64_t events_before = engine.event_count();
    LatticeConfig cur = engine.config();

    std::vector<ModeState> st(static_cast<std::size_t>(modes));
    for (int j = 1; j <= modes; ++j) {
      auto& s = st[static_cast<std::size_t>(j - 1)];
      const auto& t = tab[static_cast<std::size_t>(j - 1)];
      for (int x = 1; x < n; ++x) {
        s.a += t.h[static_cast<std::size_t>(x)] * cur[x];
        s.b += t.lap[static_cast<std::size_t>(x)] * cur[x];
      }
      s.a *= scale;
      s.b *= scale;
      s.bulk = gamma_field(cur, spec.bp, t.h).bulk;
    }
    auto boundary_gamma = [&](const ModeTables& t) {
      const double lr = cur[1] ? 1.0 - spec.bp.alpha : spec.bp.alpha;
      const double rr = cur[n - 1] ? 1.0 - spec.bp.beta : spec.bp.beta;
      return (t.grad2.front() * lr + t.grad2.back() * rr) / nn;
    };
    std::vector<double> bnd(static_cast<std::size_t>(modes));
    for (int j = 0; j < modes; ++j) bnd[static_cast<std::size_t>(j)] = boundary_gamma(tab[static_cast<std::size_t>(j)]);

    auto hold = [&](const LatticeConfig&, double dur) {
      const double d = dur / n2;
      for (int j = 0; j < modes; ++j) {
        auto& s = st[static_cast<std::size_t>(j)];
        s.int_b += s.b * d;
        s.int_bulk += s.bulk * d;
        s.int_boundary += bnd[static_cast<std::size_t>(j)] * d;
      }
    };

    auto bond_active = [&](int b) { return b >= 1 && b <= n - 2 && cur[b] != cur[b + 1]; };

    auto on_event = [&](const Event& e) {
      // Sites whose occupation changes, with the sign of the change.
      int s1 = 0, s2 = 0;
      double d1 = 0.0, d2 = 0.0;
      int lo = 0, hi = 0;  // bonds whose activity may change
      if (e.kind == EventKind::Swap) {
        s1 = e.site;
        s2 = e.site + 1;
        d1 = static_cast<double>(cur[s2]) - cur[s1];
        d2 = -d1;
        lo = e.site - 1;
        hi = e.site + 1;
      } else {
        s1 = e.kind == EventKind::LeftFlip ? 1 : n - 1;
        d1 = cur[s1] ? -1.0 : 1.0;
        lo = hi = e.kind == EventKind::LeftFlip ? 1 : n - 2;
      }
      const bool old_lo = bond_active(lo), old_hi = bond_active(hi);
      if (e.kind == EventKind::Swap) {
        cur.swap_bond(e.site);
      } else {
        cur.flip(s1);
      }
      const double dlo = static_cast<double>(bond_active(lo)) - old_lo;
      const double dhi = lo == hi ? 0.0 : static_cast<double>(bond_active(hi)) - old_hi;
      for (int j = 0; j < modes; ++j) {
        auto& s = st[static_cast<std::size_t>(j)];
        const auto& t = tab[static_cast<std::size_t>(j)];
        double da = t.h[static_cast<std::size_t>(s1)] * d1;
        double db = t.lap[static_cast<std::size_t>(s1)] * d1;
        if (s2) {
          da += t.h[static_cast<std::size_t>(s2)] * d2;
          db += t.lap[static_cast<std::size_t>(s2)] * d2;
        }
        da *= scale;
        s.a += da;
        s.b += scale * db;
        s.qv += da * da;
        if (dlo != 0.0) s.bulk += dlo * t.grad2[static_cast<std::size_t>(lo)] / nn;
        if (dhi != 0.0) s.bulk += dhi * t.grad2[static_cast<std::size_t>(hi)] / nn;
        bnd[static_cast<std::size_t>(j)] = boundary_gamma(t);
      }
    };

    auto record = [&](int k) {
      for (int j = 1; j <= modes; ++j) {
        const auto& s = st[static_cast<std::size_t>(j - 1)];
        const auto c = static_cast<std::size_t>(k * modes + j - 1);
        out.y[out.at(r, k, j)] = s.a - centre_y[c];
        out.integral_y[out.at(r, k, j)] = s.int_b - centre_iy[c];
      }
    };

    record(0);
    for (int k = 1; k < kpts; ++k) {
      engine.run_until(base + n2 * out.grid[static_cast<std::size_t>(k)], rng, hold, on_event);
      record(k);
    }
    for (int j = 1; j <= modes; ++j) {
      const auto& s = st[static_cast<std::size_t>(j - 1)];
      out.qv[out.at(r, j)] = s.qv;
      out.gamma_bulk[out.at(r, j)] = s.int_bulk;
      out.gamma_boundary[out.at(r, j)] = s.int_boundary;
    }
    events[static_cast<std::size_t>(w)] += engine.event_count() - events_before;
  });

  for (auto e : events) out.events += e;
  return out;
}

double MartingaleReport::max_qv_deviation() const {
  double m = 0.0;
  for (double q : qv_ratio) m = std::max(m, std::abs(q - 1.0));
  return m;
}

bool MartingaleReport::passed(double z_threshold, double qv_tolerance) const {
  return max_increment_z < z_threshold && max_qv_deviation() <= qv_tolerance;
}

MartingaleReport martingale_diagnostic(const MartingalePaths& p, int n) {
  if (p.replicas < 2 || p.grid.size() < 2) throw ConfigError("martingale diagnostic needs 2 replicas and 2 grid points");
  const double rr = p.replicas;
  const int kpts = static_cast<int>(p.grid.size());
  MartingaleReport rep;
  rep.n = n;
  rep.boundary_share_bound = 5.0 / n;

  auto zscore = [&](auto&& value) {
    CompensatedSum s, s2;
    for (int r = 0; r < p.replicas; ++r) {
      const double v = value(r);
      s.add(v);
      s2.add(v * v);
    }
    const double mean = s.value() / rr;
    const double var = std::max(0.0, (s2.value() - rr * mean * mean) / (rr - 1.0));
    return var > 0.0 ? std::abs(mean) / std::sqrt(var / rr) : (mean == 0.0 ? 0.0 : INFINITY);
  };

  for (int j = 1; j <= p.modes; ++j) {
    for (int k = 1; k < kpts; ++k)
      rep.max_increment_z = std::max(rep.max_increment_z, zscore([&](int r) {
        return p.martingale(r, k, j) - p.martingale(r, k - 1, j);
      }));
    rep.max_final_z = std::max(rep.max_final_z, zscore([&](int r) { return p.martingale(r, kpts - 1, j); }));

    CompensatedSum qv, g, gb, m2, m4, gg, mg;
    for (int r = 0; r < p.replicas; ++r) {
      const double total = p.gamma_bulk[p.at(r, j)] + p.gamma_boundary[p.at(r, j)];
      const double m = p.martingale(r, kpts - 1, j);
      qv.add(p.qv[p.at(r, j)]);
      g.add(total);
      gb.add(p.gamma_boundary[p.at(r, j)]);
      m2.add(m * m);
      m4.add(m * m * m * m);
      gg.add(total * total);
      mg.add(m * m * total);
    }
    rep.qv_ratio.push_back(qv.value() / g.value());
    rep.boundary_share.push_back(gb.value() / g.value());
    const double ma = m2.value() / rr, mb = g.value() / rr;
    const double ratio = ma / mb;
    const double va = m4.value() / rr - ma * ma, vb = gg.value() / rr - mb * mb, cab = mg.value() / rr - ma * mb;
    rep.second_moment_ratio.push_back(ratio);
    rep.second_moment_se.push_back(std::sqrt(std::max(0.0, va - 2.0 * ratio * cab + ratio * ratio * vb) / rr) / mb);
  }
  return rep;
}

}  // namespace ssep
