#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelflow/range_model.hpp"
#include "tunnelflow/sensor_types.hpp"

namespace tunnelflow {

enum class ProfileKind { constant_velocity, trapezoidal, sinusoidal };

std::string_view to_string(ProfileKind kind);

/// Ground-truth motion along the tunnel (x) axis, starting at x = 0.
///
///  - constant_velocity: v(t) = speed.
///  - trapezoidal: ramp up at `accel` to `cruise`, hold, ramp down to rest at
///    `duration`. Falls back to a triangle when the ramps cannot fit.
///  - sinusoidal: v(t) = amplitude * sin(2 pi t / period).
struct MotionProfile {
  ProfileKind kind = ProfileKind::constant_velocity;
  double speed_mps = 0.5;
  double accel_mps2 = 0.0;
  double cruise_mps = 0.0;
  double amplitude_mps = 0.0;
  double period_s = 0.0;
  double duration_s = 100.0;
  double sample_rate_hz = 20.0;

  static MotionProfile constant(double speed_mps, double duration_s, double rate_hz);
  static MotionProfile trapezoidal(double accel_mps2, double cruise_mps, double duration_s,
                                   double rate_hz);
  static MotionProfile sinusoidal(double amplitude_mps, double period_s, double duration_s,
                                  double rate_hz);

  void validate() const;

  /// Analytic position and velocity; t is clamped to [0, duration].
  double position(double t_s) const;
  double velocity(double t_s) const;

  bool operator==(const MotionProfile&) const = default;
};

struct QualityRange {
  int min = 0;
  int max = 0;

  bool operator==(const QualityRange&) const = default;
};

/// Surface and lighting condition driving the flow quality model.
///
/// Dropouts follow a two-state Markov chain whose stationary dropout
/// probability is `p_dropout` and whose burst lengths are geometric with
/// mean `dropout_burst_mean` samples, optionally truncated at
/// `dropout_burst_max` samples (0 = no cap).
struct ScenarioPreset {
  std::string name;
  double range_true_m = 1.5;
  double p_dropout = 0.0;
  double dropout_burst_mean = 1.0;
  std::size_t dropout_burst_max = 0;
  double flow_noise_sigma_rad = 0.0;
  double range_noise_sigma_cm = 0.0;
  QualityRange quality_good{150, 255};
  QualityRange quality_bad{0, 60};
  std::string description;

  void validate(int quality_threshold = 100) const;

  bool operator==(const ScenarioPreset&) const = default;
};

struct TruthSample {
  TimestampUs t = 0;
  double x_m = 0.0;

  bool operator==(const TruthSample&) const = default;
};

struct SimulationResult {
  std::vector<LogRecord> records;
  std::vector<TruthSample> truth;
  std::vector<bool> dropout;

  /// Ground-truth displacement between the first and last record.
  double truth_total() const;
  /// Fraction of records emitted as dropouts.
  double dropout_fraction() const;
};

/// Seedable generator used by the simulator: std::mt19937_64 seeded with
/// the 64-bit seed. Uniforms take the top 53 bits of one draw; normals use
/// the Box-Muller cosine branch on two uniforms (no caching of the sine
/// branch). This fixes the stream independent of the standard library's
/// distribution implementations.
class SimulationRng {
 public:
  explicit SimulationRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer on [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

/// Generates a synthetic log plus ground truth. Deterministic in
/// (profile, scenario, seed, calibration). Raw ranges are synthesized so
/// that `calibration` maps them back to the scenario's true range.
SimulationResult simulate(const MotionProfile& profile, const ScenarioPreset& scenario,
                          std::uint64_t seed, const RangeCalibration& calibration = {});

/// Presets mirroring the passenger-tunnel surface/lighting conditions.
std::vector<ScenarioPreset> builtin_presets();
std::optional<ScenarioPreset> find_builtin_preset(std::string_view name);

inline constexpr std::string_view kTruthHeader = "t_us,truth_x_m";

void write_truth(std::ostream& out, std::span<const TruthSample> truth);

}  // namespace tunnelflow
