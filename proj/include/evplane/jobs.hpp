#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evplane/entire.hpp"
#include "evplane/geodesic.hpp"

namespace evplane {

enum class JobMode { example, solve, verify, entire_check, integrate, export_points };

/// Process exit codes of the command-line front end.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verification_failed = 1;
inline constexpr int config_error = 2;
inline constexpr int chart_breakdown = 3;
inline constexpr int blow_up = 4;
inline constexpr int positivity_violation = 5;
}  // namespace exit_code

/// Invalid job configuration. `what()` is already anchored
/// ("<source>:<line>: ..." when the offending key can be located).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A frequency as written by the user: exact when given as p/q or an integer.
struct LambdaValue {
  double value;
  std::optional<Rational> exact;
};

struct JobConfig {
  static constexpr int kSchemaVersion = 1;

  JobMode mode = JobMode::example;
  int n = 3;
  int m = 2;
  std::vector<LambdaValue> lambdas;
  std::vector<FrequencyBlock> blocks;      ///< when non-empty, (Lambda~, B) come from these
  std::optional<std::vector<double>> b;    ///< row-major (n-1) x m; zero when absent
  std::optional<std::vector<double>> z0;   ///< integrate: explicit initial slope
  std::optional<std::vector<double>> zd0;  ///< integrate: explicit initial velocity

  double t_min = 0.0;
  double t_max = 6.283185307179586;
  int t_samples = 101;

  double box_lo = -1.0;
  double box_hi = 1.0;
  int points = 100;
  int grid = 32;  ///< export: samples per axis
  std::vector<std::string> projection;  ///< export: three ambient coordinate names
  bool faces = false;

  double step = 1e-3;
  Signature kind = Signature::euclidean;
  std::string which = "all";
  int grid_points = kDefaultScanPoints;
  std::optional<std::pair<double, double>> interval;

  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool quiet = false;
};

/// Parses a JSON job file (schema_version 1). `source` names the file in messages.
JobConfig parse_job_config(std::string_view json_text, std::string_view source = "config");
JobConfig load_job_config(const std::string& path);

std::string_view mode_name(JobMode mode);
std::optional<JobMode> parse_mode(std::string_view name);

/// Parses "p/q", an integer ("2") or a decimal ("0.5") frequency.
LambdaValue parse_lambda(std::string_view text);

/// Parses a block "lambda:a,b;a,b;..." into a FrequencyBlock.
FrequencyBlock parse_block(std::string_view text);

/// Cross-field validation (dimensions, ranges, mode requirements). Throws ConfigError.
void validate(const JobConfig& config);

struct JobOutcome {
  int exit_code = exit_code::ok;
  std::string summary;                          ///< one-line human summary
  std::map<std::string, std::string> artifacts;  ///< file name -> contents (always has report.json)
};

/// Runs a job and renders its artifacts. Deterministic in (config, seed).
/// Errors are mapped to exit codes; nothing is written to disk.
JobOutcome run_job(const JobConfig& config);

/// run_job + write every artifact under config.out_dir.
JobOutcome run_and_write(const JobConfig& config);

/// 17-significant-digit rendering used by CSV and OBJ output.
std::string format_double(double v);

}  // namespace evplane
