#include "ssep/harness.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssep/csv.hpp"
#include "ssep/errors.hpp"
#include "ssep/exact_oracle.hpp"
#include "ssep/heat1d.hpp"
#include "ssep/martingale.hpp"
#include "ssep/triangle.hpp"

namespace ssep {

using nlohmann::json;

namespace {

const std::vector<std::string> kSubcommands = {"exact", "stationary-cov", "relax",      "green",
                                               "heat",  "ou",             "martingale", "acceptance"};

bool finite_in(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

void RunConfig::validate() const {
  if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  if (n < 2) throw ConfigError("n must be at least 2");
  if (!finite_in(alpha, 0.0, 1.0) || !finite_in(beta, 0.0, 1.0)) throw ConfigError("alpha and beta must lie in [0,1]");
  if (modes < 1) throw ConfigError("modes must be positive");
  if (replicas < 2) throw ConfigError("replicas must be at least 2");
  if (!finite_in(burn_in, 0.0, INFINITY)) throw ConfigError("burn_in must be nonnegative");
  if (times.empty()) throw ConfigError("times must not be empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!finite_in(times[i], 0.0, INFINITY)) throw ConfigError("times must be nonnegative");
    if (i > 0 && times[i] < times[i - 1]) throw ConfigError("times must be sorted");
  }
  if (!seed) throw ConfigError("a seed is required");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be positive");
  if (!std::isfinite(c)) throw ConfigError("c must be finite");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (workers < 1) throw ConfigError("workers must be positive");
}

json to_json(const RunConfig& c) {
  json j{{"subcommand", c.subcommand}, {"n", c.n},         {"alpha", c.alpha},     {"beta", c.beta},
         {"modes", c.modes},           {"replicas", c.replicas}, {"burn_in", c.burn_in}, {"times", c.times},
         {"dt", c.dt},                 {"t_final", c.t_final},   {"c", c.c},             {"out", c.out},
         {"format", c.format},         {"workers", c.workers}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "subcommand") c.subcommand = v.get<std::string>();
      else if (key == "n") c.n = v.get<int>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "beta") c.beta = v.get<double>();
      else if (key == "modes") c.modes = v.get<int>();
      else if (key == "replicas") c.replicas = v.get<int>();
      else if (key == "burn_in") c.burn_in = v.get<double>();
      else if (key == "times") c.times = v.get<std::vector<double>>();
      else if (key == "seed") c.seed = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(v.get<std::uint64_t>());
      else if (key == "dt") c.dt = v.get<double>();
      else if (key == "t_final") c.t_final = v.get<double>();
      else if (key == "c") c.c = v.get<double>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "workers") c.workers = v.get<int>();
      else throw ConfigError("unknown configuration key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("configuration file is not valid JSON: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("config") && j.contains("version")) return config_from_json(j["config"]);
  return config_from_json(j);
}

int exit_code(const std::vector<CriterionResult>& criteria) {
  bool stat = false;
  for (const auto& c : criteria) {
    if (c.passed) continue;
    if (c.kind == CriterionKind::Numerical) return kExitNumerical;
    stat = true;
  }
  return stat ? kExitStatistical : kExitPass;
}

namespace {

CriterionResult criterion(const std::string& name, CriterionKind kind, bool passed, json metrics = json::object()) {
  CriterionResult c;
  c.name = name;
  c.kind = kind;
  c.passed = passed;
  c.metrics = std::move(metrics);
  return c;
}

void write_triangle_csv(std::ostream& os, const TriangleField& f) {
  CsvWriter w(os, {"x", "y", "value"});
  for (int x = 1; x <= f.n() - 2; ++x)
    for (int y = x + 1; y <= f.n() - 1; ++y) w.row(x, y, f.at(x, y));
}

json triangle_json(const TriangleField& f) {
  json rows = json::array();
  for (int x = 1; x <= f.n() - 2; ++x)
    for (int y = x + 1; y <= f.n() - 1; ++y) rows.push_back({{"x", x}, {"y", y}, {"value", f.at(x, y)}});
  return rows;
}

CommandResult cmd_exact(const RunConfig& cfg) {
  if (cfg.n > kExactMaxN) throw CapacityError("exact solve supports n <= " + std::to_string(kExactMaxN));
  const BoundaryParams bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  const ExactCheck chk = exact_check(cfg.n, bp);
  const auto sd = stationary_distribution(build_generator_dense(cfg.n, bp));
  CommandResult r;
  const bool ok = chk.profile_error <= 1e-12 && chk.signed_error <= 1e-10 && chk.sign_uniform;
  r.report = {{"sigma", chk.sign},
              {"sign_uniform", chk.sign_uniform},
              {"profile_error", chk.profile_error},
              {"two_point_error", chk.signed_error},
              {"magnitude_error", chk.magnitude_error},
              {"residual", sd.residual}};
  r.criteria.push_back(criterion("exact closed form", CriterionKind::Numerical, ok, r.report));
  if (cfg.n >= 3) {
    const TriangleField tp = exact_two_point(sd);
    std::ostringstream os;
    write_triangle_csv(os, tp);
    r.csv = os.str();
    r.report["two_point"] = triangle_json(tp);
  } else {
    r.csv = "x,y,value\n";
  }
  return r;
}

CommandResult cmd_stationary_cov(const RunConfig& cfg) {
  StationaryCovExperiment e;
  e.n = cfg.n;
  e.bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  e.modes = cfg.modes;
  e.replicas = cfg.replicas;
  e.burn_in = cfg.burn_in;
  e.seed = *cfg.seed;
  e.workers = cfg.workers;
  e.allowance = cfg.alpha == cfg.beta ? 0.0 : 0.02;
  const StationaryCovReport rep = stationary_cov_experiment(e);
  CommandResult r;
  r.report = {{"rows", covariance_json(rep.rows)}, {"allowance", e.allowance}, {"events", rep.events}};
  r.criteria.push_back(criterion("stationary covariance", CriterionKind::Statistical, rep.covariance_ok));
  if (rep.gaussian_tested) {
    r.report["gaussianity"] = rep.gaussianity;
    r.criteria.push_back(criterion("gaussianity", CriterionKind::Statistical, rep.gaussian_ok));
  }
  std::ostringstream os;
  write_covariance_csv(os, rep.rows);
  r.csv = os.str();
  return r;
}

CommandResult cmd_relax(const RunConfig& cfg) {
  RelaxExperiment e;
  e.n = cfg.n;
  e.bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  e.modes = cfg.modes;
  e.replicas = cfg.replicas;
  e.times = cfg.times;
  e.seed = *cfg.seed;
  e.workers = cfg.workers;
  const RelaxReport rep = relax_experiment(e);
  CommandResult r;
  r.report = {{"rows", covariance_json(rep.rows)}, {"max_profile_z", rep.max_profile_z}, {"events", rep.events}};
  r.criteria.push_back(criterion("dynamic covariance", CriterionKind::Statistical, rep.covariance_ok));
  r.criteria.push_back(criterion("mean profile", CriterionKind::Statistical, rep.profile_ok));
  std::ostringstream os;
  write_covariance_csv(os, rep.rows, true);
  r.csv = os.str();
  return r;
}

CommandResult cmd_green(const RunConfig& cfg) {
  if (cfg.n < 3) throw ConfigError("green needs n >= 3");
  const GreenCheck g = green_check(cfg.n, cfg.c);
  CommandResult r;
  r.report = {{"closed_form_error", g.closed_form_error}, {"maximum", g.maximum}, {"bound", g.bound}};
  r.criteria.push_back(criterion("green closed form", CriterionKind::Numerical, g.closed_form_error <= 1e-8));
  r.criteria.push_back(criterion("green maximum bound", CriterionKind::Numerical,
                                 g.maximum <= g.bound + 1e-12 * std::abs(g.bound)));
  const TriangleField phi = solve_green_triangle(cfg.n, cfg.c);
  std::ostringstream os;
  write_triangle_csv(os, phi);
  r.csv = os.str();
  r.report["field"] = triangle_json(phi);
  return r;
}

CommandResult cmd_heat(const RunConfig& cfg) {
  if (cfg.n < 3) throw ConfigError("heat needs n >= 3");
  const BoundaryParams bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  const Profile1D p0 = Profile1D::from_function(cfg.n, bp, quadratic_profile(bp));
  const HeatSolver1D heat(p0);
  const GradientReport grad = gradient_maxprinciple_check(p0, cfg.times);
  const CorrelationEvolution ce = correlation_evolution(TriangleField(cfg.n), p0, cfg.times.back());
  CommandResult r;
  r.report = {{"gradient_initial_max", grad.initial_max},
              {"gradient_observed_max", grad.observed_max},
              {"correlation_sup_norm", ce.solution.sup_norm},
              {"correlation_bound", ce.bound},
              {"c0", ce.c0}};
  r.criteria.push_back(criterion("gradient maximum principle", CriterionKind::Numerical, grad.holds));
  r.criteria.push_back(criterion("correlation bound", CriterionKind::Numerical, ce.bound_holds));
  std::ostringstream os;
  CsvWriter w(os, {"t", "x", "value"});
  json profiles = json::array();
  for (double t : cfg.times) {
    const Profile1D rho = heat.at(t);
    for (int x = 0; x <= cfg.n; ++x) w.row(t, x, rho[x]);
    profiles.push_back({{"t", t}, {"values", std::vector<double>(rho.values().begin(), rho.values().end())}});
  }
  r.report["profiles"] = profiles;
  r.csv = os.str();
  return r;
}

CommandResult cmd_ou(const RunConfig& cfg) {
  OuExperiment e;
  e.modes = cfg.modes;
  e.bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  e.dt = cfg.dt;
  e.t_final = cfg.t_final;
  e.burn_in = std::min(cfg.burn_in, cfg.t_final / 2.0);
  e.batch_time = cfg.t_final / 100.0;
  e.seed = *cfg.seed;
  const OuReport rep = ou_experiment(e);
  CommandResult r;
  r.report = {{"lyapunov_vs_closed_form", rep.lyapunov_vs_closed_form},
              {"lyapunov_residual", rep.lyapunov_residual},
              {"dt", rep.dt},
              {"rows", covariance_json(rep.euler_rows)},
              {"exact_rows", covariance_json(rep.exact_rows)}};
  r.criteria.push_back(criterion("lyapunov closed form", CriterionKind::Numerical,
                                 rep.lyapunov_vs_closed_form <= 1e-6 && rep.lyapunov_residual <= 1e-12));
  r.criteria.push_back(criterion("euler-maruyama covariance", CriterionKind::Statistical, rep.euler_ok));
  r.criteria.push_back(criterion("exact-step covariance", CriterionKind::Statistical, rep.exact_ok));
  std::ostringstream os;
  write_covariance_csv(os, rep.euler_rows);
  r.csv = os.str();
  return r;
}

CommandResult cmd_martingale(const RunConfig& cfg) {
  MartingaleSpec s;
  s.n = cfg.n;
  s.bp = BoundaryParams::make(cfg.alpha, cfg.beta);
  s.initial = InitialCondition::Product;
  s.gamma = quadratic_profile(s.bp);
  s.t_final = cfg.t_final;
  s.dt_record = cfg.dt;
  s.replicas = cfg.replicas;
  s.modes = cfg.modes;
  s.seed = *cfg.seed;
  s.workers = cfg.workers;
  const MartingaleReport rep = martingale_diagnostic(record_martingale_paths(s), s.n);
  CommandResult r;
  r.report = {{"max_increment_z", rep.max_increment_z},
              {"max_final_z", rep.max_final_z},
              {"qv_ratio", rep.qv_ratio},
              {"second_moment_ratio", rep.second_moment_ratio},
              {"second_moment_se", rep.second_moment_se},
              {"boundary_share", rep.boundary_share},
              {"boundary_share_bound", rep.boundary_share_bound}};
  r.criteria.push_back(criterion("increment means", CriterionKind::Statistical, rep.max_increment_z < 4.0));
  r.criteria.push_back(criterion("quadratic variation", CriterionKind::Statistical, rep.max_qv_deviation() <= 0.1));
  std::ostringstream os;
  CsvWriter w(os, {"j", "qv_ratio", "second_moment_ratio", "second_moment_se", "boundary_share"});
  for (std::size_t j = 0; j < rep.qv_ratio.size(); ++j)
    w.row(static_cast<int>(j + 1), rep.qv_ratio[j], rep.second_moment_ratio[j], rep.second_moment_se[j],
          rep.boundary_share[j]);
  r.csv = os.str();
  return r;
}

CommandResult cmd_acceptance(const RunConfig& cfg) {
  AcceptanceOptions o;
  o.seed = *cfg.seed;
  o.workers = cfg.workers;
  CommandResult r;
  r.criteria = run_acceptance(o);
  std::ostringstream os;
  CsvWriter w(os, {"id", "kind", "passed", "seconds"});
  json all = json::array();
  for (const auto& c : r.criteria) {
    w.row(c.id, c.kind == CriterionKind::Numerical ? "numerical" : "statistical", c.passed ? 1 : 0, c.seconds);
    all.push_back(to_json(c));
  }
  r.csv = os.str();
  r.report = {{"criteria", all}};
  return r;
}

}  // namespace

CommandResult run_command(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.subcommand == "exact") return cmd_exact(cfg);
  if (cfg.subcommand == "stationary-cov") return cmd_stationary_cov(cfg);
  if (cfg.subcommand == "relax") return cmd_relax(cfg);
  if (cfg.subcommand == "green") return cmd_green(cfg);
  if (cfg.subcommand == "heat") return cmd_heat(cfg);
  if (cfg.subcommand == "ou") return cmd_ou(cfg);
  if (cfg.subcommand == "martingale") return cmd_martingale(cfg);
  return cmd_acceptance(cfg);
}

json to_json(const RunManifest& m) {
  return json{{"config", m.config}, {"version", m.version}, {"criteria", m.criteria}, {"wall_time", m.wall_time}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.config = j.at("config");
    m.version = j.at("version").get<std::string>();
    m.criteria = j.at("criteria").get<std::vector<json>>();
    m.wall_time = j.at("wall_time").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest_atomic(const std::string& path, const RunManifest& m) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write manifest " + tmp.string());
    out << to_json(m).dump(2) << '\n';
    out.flush();
    if (!out) throw ConfigError("failed writing manifest " + tmp.string());
  }
  fs::rename(tmp, target);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open symmetric simple exclusion: simulation and analytic checks"};
  std::string subcommand, config_path, manifest_path, times_text, format;
  std::optional<int> n, modes, replicas, workers;
  std::optional<double> alpha, beta, burn_in, dt, t_final, c;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  app.add_option("subcommand", subcommand, "exact | stationary-cov | relax | green | heat | ou | martingale | acceptance");
  app.add_option("--config", config_path, "JSON configuration (or a run manifest)");
  app.add_option("--n", n, "system size N");
  app.add_option("--alpha", alpha, "left reservoir density");
  app.add_option("--beta", beta, "right reservoir density");
  app.add_option("--modes", modes, "number of sine modes J");
  app.add_option("--replicas", replicas, "replica count R");
  app.add_option("--burn-in", burn_in, "burn-in in diffusive time");
  app.add_option("--times", times_text, "observation times a,b,c");
  app.add_option("--seed", seed, "master seed (required)");
  app.add_option("--dt", dt, "OU step or martingale recording step");
  app.add_option("--t-final", t_final, "OU and martingale horizon");
  app.add_option("--c", c, "green source strength");
  app.add_option("--out", out_path, "output path (default: standard output)");
  app.add_option("--format", format, "csv | json");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  CommandResult result;
  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (!subcommand.empty()) cfg.subcommand = subcommand;
    if (n) cfg.n = *n;
    if (alpha) cfg.alpha = *alpha;
    if (beta) cfg.beta = *beta;
    if (modes) cfg.modes = *modes;
    if (replicas) cfg.replicas = *replicas;
    if (burn_in) cfg.burn_in = *burn_in;
    if (seed) cfg.seed = *seed;
    if (dt) cfg.dt = *dt;
    if (t_final) cfg.t_final = *t_final;
    if (c) cfg.c = *c;
    if (out_path) cfg.out = *out_path;
    if (!format.empty()) cfg.format = format;
    if (workers) cfg.workers = *workers;
    if (!times_text.empty()) {
      cfg.times.clear();
      for (const auto& tok : split_csv_line(times_text)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size() || tok.empty()) throw ConfigError("bad time '" + tok + "'");
        cfg.times.push_back(v);
      }
    }
    cfg.validate();
    result = run_command(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }

  const std::string body =
      cfg.format == "json"
          ? json{{"subcommand", cfg.subcommand}, {"report", result.report}, {"criteria", [&] {
                   json a = json::array();
                   for (const auto& cr : result.criteria) a.push_back(to_json(cr));
                   return a;
                 }()}}.dump(2) + "\n"
          : result.csv;
  if (cfg.out.empty()) {
    out << body;
  } else {
    std::ofstream f(cfg.out, std::ios::trunc);
    if (!f) {
      err << "config error: cannot write " << cfg.out << '\n';
      return kExitConfig;
    }
    f << body;
  }

  for (const auto& cr : result.criteria)
    err << (cr.passed ? "PASS " : "FAIL ") << cr.name << (cr.summary.empty() ? "" : ": " + cr.summary) << '\n';

  if (manifest_path.empty() && !cfg.out.empty()) manifest_path = cfg.out + ".manifest.json";
  if (!manifest_path.empty()) {
    RunManifest m;
    m.config = to_json(cfg);
    for (const auto& cr : result.criteria) m.criteria.push_back(to_json(cr));
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
      write_manifest_atomic(manifest_path, m);
    } catch (const std::exception& e) {
      err << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  return exit_code(result.criteria);
}

}  // namespace ssep
