#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelflow/pipeline.hpp"
#include "tunnelflow/sensor_types.hpp"
#include "tunnelflow/simulator.hpp"

namespace tunnelflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;

/// Bad invocation: unknown preset, empty preset list, malformed flag value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input file, or unwritable output.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optional per-key overrides from flags; unset keys fall through to the
/// config file, then to defaults.
struct ConfigOverrides {
  std::optional<int> quality_threshold;
  std::optional<std::size_t> window_len;
  std::optional<double> range_gain;
  std::optional<double> range_offset_cm;
  std::optional<double> max_prediction_horizon_s;
  std::optional<std::string> aggregation;
};

enum class Command { simulate, replay, compare };

std::string_view to_string(Command command);

/// Fully resolved description of one CLI run.
struct RunManifest {
  Command command = Command::replay;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out_dir = ".";
  OdometryConfig config;
  std::uint64_t seed = 1;
  std::optional<MotionProfile> profile;
  std::vector<ScenarioPreset> presets;
};

/// Parses `key = value` lines; `#` starts a comment. Throws InputError on a
/// malformed line or a duplicate key.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source);

/// Applies odometry keys from a parsed config file. Unknown keys are an
/// InputError.
void apply_config_entries(OdometryConfig& config, const std::map<std::string, std::string>& entries,
                          const std::string& source);

/// defaults <- config file <- overrides, then validated.
OdometryConfig resolve_config(const std::optional<std::filesystem::path>& config_path,
                              const ConfigOverrides& overrides);

/// `constant:SPEED`, `trapezoidal:ACCEL:CRUISE`, or `sinusoidal:AMPLITUDE:PERIOD`.
MotionProfile parse_profile(std::string_view spec, double duration_s, double rate_hz);
std::string format_profile(const MotionProfile& profile);

/// Preset definition in `key = value` form (see README for keys).
ScenarioPreset load_preset_file(const std::filesystem::path& path);

/// Resolves a comma-separated list of builtin preset names.
std::vector<ScenarioPreset> resolve_presets(std::string_view names);

/// Seed for one preset inside a comparison: base XOR FNV-1a-64(name).
std::uint64_t preset_seed(std::uint64_t base_seed, std::string_view preset_name);

void write_report(std::ostream& out, const DisplacementReport& report, Algorithm algorithm,
                  const RunManifest& manifest);
void write_series(std::ostream& out, const DisplacementReport& report);
void write_manifest(std::ostream& out, const RunManifest& manifest);

struct ComparisonRow {
  std::string preset;
  std::uint64_t seed = 0;
  double dropout_fraction = 0.0;
  double truth_m = 0.0;
  double baseline_m = 0.0;
  double prediction_m = 0.0;
  std::size_t prediction_no_history = 0;
};

/// Simulates each preset and runs both integrators. Totals are along-track (x).
std::vector<ComparisonRow> compare_presets(const std::vector<ScenarioPreset>& presets,
                                           const MotionProfile& profile, std::uint64_t base_seed,
                                           const OdometryConfig& config);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows);

/// Command bodies. Each returns an exit code; they throw UsageError or
/// InputError which run_cli maps to exit codes.
int cmd_replay(const std::filesystem::path& log_path, const RunManifest& manifest, std::ostream& out);
int cmd_simulate(const RunManifest& manifest, std::ostream& out);
int cmd_compare(const RunManifest& manifest, std::ostream& out);

/// Full command-line entry point. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tunnelflow::cli
