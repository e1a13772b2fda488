#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "fplap/nonlocal.hpp"

namespace fplap {

/// Everything a CLI run needs; keys match the config-file keys.
struct RunConfig {
  std::string command;
  ProblemParams params;
  double a = 0.0;
  double b = 1.0;
  std::size_t n = 160;
  std::uint64_t seed = 1;
  std::optional<double> lambda_rel;  ///< λ as a multiple of the estimated Λ₁
  // eigen / constants
  double eigen_tol = 1e-10;
  std::size_t samples = 100;
  // solve
  std::string branch = "plus";
  std::size_t starts = 8;
  double residual_tol = 1e-8;
  double energy_tol = 1e-10;
  std::size_t max_iter = 10000;
  // sweep
  double lambda_min = 0.01;
  double lambda_max = 10.0;
  std::size_t grid = 20;
  std::size_t bisection = 20;
  // verify
  std::filesystem::path input;
  double verify_tol = 1e-6;
  bool refine = false;
  // output
  std::filesystem::path out = "out";
  std::filesystem::path cache;  ///< kernel cache directory; empty disables caching
};

/// Keys accepted in config files and as --flags (with '-' for '_').
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Throws ParseError (with the given
/// line when nonzero) for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, std::size_t line = 0);

/// Parses key = value lines with # comments, without validating.
void read_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Throws ValidationError naming the violated assumption.
void validate(const RunConfig& cfg);

/// read_config_file into a default RunConfig, then validate.
RunConfig load_config(const std::filesystem::path& path);

/// Resolved settings as key -> text, in config_keys() order.
std::map<std::string, std::string> describe(const RunConfig& cfg);

}  // namespace fplap
