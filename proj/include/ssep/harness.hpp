#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ssep/experiments.hpp"

namespace ssep {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitPass = 0;
inline constexpr int kExitStatistical = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitConfig = 4;

/// Resolved run configuration. Precedence: built-in defaults, then the JSON
/// file given by --config, then individual command-line flags.
struct RunConfig {
  std::string subcommand;
  int n = 32;
  double alpha = 0.5;
  double beta = 0.5;
  int modes = 4;
  int replicas = 1000;
  double burn_in = 1.0;
  std::vector<double> times{0.05, 0.1, 0.2};
  std::optional<std::uint64_t> seed;
  double dt = 1e-3;      ///< OU step, or the recording step of the martingale run
  double t_final = 1.0;  ///< OU and martingale horizon
  double c = 1.0;        ///< green source strength
  std::string out;       ///< empty writes to standard output
  std::string format = "csv";
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Overlays the keys present in `j` on `base`; unknown keys are a ConfigError.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
/// Reads a RunConfig document, or the `config` member of a run manifest.
RunConfig load_config_file(const std::string& path);

struct CommandResult {
  std::vector<CriterionResult> criteria;
  std::string csv;
  nlohmann::json report = nlohmann::json::object();
};

/// Subcommands: exact, stationary-cov, relax, green, heat, ou, martingale, acceptance.
CommandResult run_command(const RunConfig& config);

/// 0 if every criterion passed, 3 if a numerical one failed, else 2.
int exit_code(const std::vector<CriterionResult>& criteria);

struct RunManifest {
  nlohmann::json config;
  std::string version = kToolVersion;
  std::vector<nlohmann::json> criteria;
  double wall_time = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
/// Writes to a temporary file in the same directory and renames it into place.
void write_manifest_atomic(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

/// Full command-line driver; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssep
