#include "tunnelflow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace tunnelflow {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

void check_quality_range(const QualityRange& range, const std::string& label) {
  if (range.min < kQualityMin || range.max > kQualityMax || range.min > range.max) {
    throw ValidationError(label + " must be a non-empty interval within [0, 255]");
  }
}

struct TrapezoidShape {
  double ramp_s;
  double peak_mps;
};

TrapezoidShape trapezoid_shape(const MotionProfile& p) {
  const double ramp = p.cruise_mps / p.accel_mps2;
  if (2.0 * ramp > p.duration_s) {
    const double half = p.duration_s / 2.0;
    return {half, p.accel_mps2 * half};
  }
  return {ramp, p.cruise_mps};
}

}  // namespace

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant_velocity:
      return "constant";
    case ProfileKind::trapezoidal:
      return "trapezoidal";
    case ProfileKind::sinusoidal:
      return "sinusoidal";
  }
  return "constant";
}

MotionProfile MotionProfile::constant(double speed_mps, double duration_s, double rate_hz) {
  MotionProfile p;
  p.kind = ProfileKind::constant_velocity;
  p.speed_mps = speed_mps;
  p.duration_s = duration_s;
  p.sample_rate_hz = rate_hz;
  return p;
}

MotionProfile MotionProfile::trapezoidal(double accel_mps2, double cruise_mps, double duration_s,
                                         double rate_hz) {
  MotionProfile p;
  p.kind = ProfileKind::trapezoidal;
  p.speed_mps = 0.0;
  p.accel_mps2 = accel_mps2;
  p.cruise_mps = cruise_mps;
  p.duration_s = duration_s;
  p.sample_rate_hz = rate_hz;
  return p;
}

MotionProfile MotionProfile::sinusoidal(double amplitude_mps, double period_s, double duration_s,
                                        double rate_hz) {
  MotionProfile p;
  p.kind = ProfileKind::sinusoidal;
  p.speed_mps = 0.0;
  p.amplitude_mps = amplitude_mps;
  p.period_s = period_s;
  p.duration_s = duration_s;
  p.sample_rate_hz = rate_hz;
  return p;
}

void MotionProfile::validate() const {
  if (!std::isfinite(duration_s) || duration_s <= 0.0) {
    throw ValidationError("profile duration must be finite and > 0");
  }
  // Timestamps are integer microseconds and must stay strictly increasing.
  if (!std::isfinite(sample_rate_hz) || sample_rate_hz <= 0.0 || sample_rate_hz > 1e6) {
    throw ValidationError("sample rate must be in (0, 1e6] Hz");
  }
  if (duration_s * sample_rate_hz > 1e9) {
    throw ValidationError("profile would generate more than 1e9 samples");
  }
  switch (kind) {
    case ProfileKind::constant_velocity:
      if (!std::isfinite(speed_mps)) throw ValidationError("speed must be finite");
      break;
    case ProfileKind::trapezoidal:
      if (!std::isfinite(accel_mps2) || accel_mps2 <= 0.0) {
        throw ValidationError("trapezoidal accel must be finite and > 0");
      }
      if (!finite_nonneg(cruise_mps)) {
        throw ValidationError("trapezoidal cruise speed must be finite and >= 0");
      }
      break;
    case ProfileKind::sinusoidal:
      if (!std::isfinite(amplitude_mps)) throw ValidationError("amplitude must be finite");
      if (!std::isfinite(period_s) || period_s <= 0.0) {
        throw ValidationError("period must be finite and > 0");
      }
      break;
  }
}

double MotionProfile::position(double t_s) const {
  const double t = std::clamp(t_s, 0.0, duration_s);
  switch (kind) {
    case ProfileKind::constant_velocity:
      return speed_mps * t;
    case ProfileKind::trapezoidal: {
      const auto [ramp, peak] = trapezoid_shape(*this);
      const double ramp_distance = 0.5 * accel_mps2 * ramp * ramp;
      if (t <= ramp) return 0.5 * accel_mps2 * t * t;
      if (t <= duration_s - ramp) return ramp_distance + peak * (t - ramp);
      const double remaining = duration_s - t;
      const double total = 2.0 * ramp_distance + peak * (duration_s - 2.0 * ramp);
      return total - 0.5 * accel_mps2 * remaining * remaining;
    }
    case ProfileKind::sinusoidal: {
      const double omega = 2.0 * std::numbers::pi / period_s;
      return amplitude_mps / omega * (1.0 - std::cos(omega * t));
    }
  }
  return 0.0;
}

double MotionProfile::velocity(double t_s) const {
  if (t_s < 0.0 || t_s > duration_s) return 0.0;
  switch (kind) {
    case ProfileKind::constant_velocity:
      return speed_mps;
    case ProfileKind::trapezoidal: {
      const auto [ramp, peak] = trapezoid_shape(*this);
      if (t_s <= ramp) return accel_mps2 * t_s;
      if (t_s <= duration_s - ramp) return peak;
      return accel_mps2 * (duration_s - t_s);
    }
    case ProfileKind::sinusoidal:
      return amplitude_mps * std::sin(2.0 * std::numbers::pi * t_s / period_s);
  }
  return 0.0;
}

void ScenarioPreset::validate(int quality_threshold) const {
  if (name.empty()) throw ValidationError("preset name must not be empty");
  const std::string where = "preset '" + name + "': ";
  if (!std::isfinite(range_true_m) || range_true_m <= 0.0) {
    throw ValidationError(where + "range_true_m must be finite and > 0");
  }
  if (!(p_dropout >= 0.0 && p_dropout <= 1.0)) {
    throw ValidationError(where + "p_dropout must be in [0, 1]");
  }
  if (!std::isfinite(dropout_burst_mean) || dropout_burst_mean < 1.0) {
    throw ValidationError(where + "dropout_burst_mean must be >= 1");
  }
  if (p_dropout > 0.0 && p_dropout < 1.0 &&
      p_dropout / (1.0 - p_dropout) > dropout_burst_mean) {
    throw ValidationError(where +
                          "dropout_burst_mean too short for p_dropout (needs >= p / (1 - p))");
  }
  if (!finite_nonneg(flow_noise_sigma_rad)) {
    throw ValidationError(where + "flow_noise_sigma_rad must be finite and >= 0");
  }
  if (!finite_nonneg(range_noise_sigma_cm)) {
    throw ValidationError(where + "range_noise_sigma_cm must be finite and >= 0");
  }
  check_quality_range(quality_good, where + "quality_good");
  check_quality_range(quality_bad, where + "quality_bad");
  if (quality_good.min < quality_threshold) {
    throw ValidationError(where + "quality_good must lie at or above the quality threshold");
  }
  if (quality_bad.max >= quality_threshold) {
    throw ValidationError(where + "quality_bad must lie below the quality threshold");
  }
}

double SimulationResult::truth_total() const {
  if (truth.empty()) return 0.0;
  return truth.back().x_m - truth.front().x_m;
}

double SimulationResult::dropout_fraction() const {
  if (dropout.empty()) return 0.0;
  const auto n = std::count(dropout.begin(), dropout.end(), true);
  return static_cast<double>(n) / static_cast<double>(dropout.size());
}

double SimulationRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SimulationRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int SimulationRng::uniform_int(int lo, int hi) {
  const double span = static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
  const int offset = static_cast<int>(std::floor(uniform() * span));
  return std::min(hi, lo + offset);
}

SimulationResult simulate(const MotionProfile& profile, const ScenarioPreset& scenario,
                          std::uint64_t seed, const RangeCalibration& calibration) {
  profile.validate();
  scenario.validate();
  calibration.validate();

  const auto n_intervals =
      static_cast<std::int64_t>(std::llround(profile.duration_s * profile.sample_rate_hz));
  const double p = scenario.p_dropout;
  const double leave_burst = 1.0 / scenario.dropout_burst_mean;
  const double enter_burst = (p > 0.0 && p < 1.0) ? p * leave_burst / (1.0 - p) : 0.0;
  const double raw_range_cm = raw_range_for(scenario.range_true_m * 100.0, calibration);

  SimulationRng rng(seed);
  SimulationResult result;
  result.records.reserve(static_cast<std::size_t>(n_intervals + 1));
  result.truth.reserve(static_cast<std::size_t>(n_intervals + 1));
  result.dropout.reserve(static_cast<std::size_t>(n_intervals + 1));

  bool in_dropout = false;
  std::size_t burst_length = 0;
  double previous_x = 0.0;
  for (std::int64_t k = 0; k <= n_intervals; ++k) {
    const auto t_us = static_cast<TimestampUs>(
        std::llround(static_cast<double>(k) * 1e6 / profile.sample_rate_hz));
    const double t_s = static_cast<double>(t_us) * 1e-6;
    const double x = profile.position(t_s);

    // Fixed draw order per sample: state, quality, flow x, flow y, range.
    const double u_state = rng.uniform();
    if (p >= 1.0) {
      in_dropout = true;
    } else if (p <= 0.0) {
      in_dropout = false;
    } else if (k == 0) {
      in_dropout = u_state < p;
    } else if (in_dropout) {
      const bool capped =
          scenario.dropout_burst_max > 0 && burst_length >= scenario.dropout_burst_max;
      if (capped || u_state < leave_burst) in_dropout = false;
    } else {
      in_dropout = u_state < enter_burst;
    }
    burst_length = in_dropout ? burst_length + 1 : 0;

    const QualityRange& q = in_dropout ? scenario.quality_bad : scenario.quality_good;
    const int quality = rng.uniform_int(q.min, q.max);
    const double noise_x = rng.normal() * scenario.flow_noise_sigma_rad;
    const double noise_y = rng.normal() * scenario.flow_noise_sigma_rad;
    const double noise_r = rng.normal() * scenario.range_noise_sigma_cm;

    LogRecord record;
    record.flow.t = t_us;
    record.flow.quality = quality;
    if (!in_dropout) {
      const double dx = k == 0 ? 0.0 : x - previous_x;
      record.flow.theta_x = dx / scenario.range_true_m + noise_x;
      record.flow.theta_y = noise_y;
    }
    record.range.t = t_us;
    record.range.r_raw_cm = std::max(0.0, raw_range_cm + noise_r);

    result.records.push_back(record);
    result.truth.push_back({t_us, x});
    result.dropout.push_back(in_dropout);
    previous_x = x;
  }
  return result;
}

std::vector<ScenarioPreset> builtin_presets() {
  std::vector<ScenarioPreset> presets;

  ScenarioPreset floor_no_led;
  floor_no_led.name = "floor_no_led";
  floor_no_led.range_true_m = 1.2;
  floor_no_led.p_dropout = 0.55;
  floor_no_led.dropout_burst_mean = 250.0;
  floor_no_led.flow_noise_sigma_rad = 0.002;
  floor_no_led.range_noise_sigma_cm = 1.0;
  floor_no_led.quality_good = {100, 180};
  floor_no_led.quality_bad = {0, 70};
  floor_no_led.description = "textured floor, unlit: long texture-loss stretches";
  presets.push_back(floor_no_led);

  ScenarioPreset floor_led;
  floor_led.name = "floor_led";
  floor_led.range_true_m = 1.2;
  floor_led.p_dropout = 0.1;
  floor_led.dropout_burst_mean = 5.0;
  floor_led.flow_noise_sigma_rad = 0.001;
  floor_led.range_noise_sigma_cm = 1.0;
  floor_led.quality_good = {140, 255};
  floor_led.quality_bad = {0, 80};
  floor_led.description = "textured floor with LED lighting: short, sparse dropouts";
  presets.push_back(floor_led);

  ScenarioPreset ceiling_no_led;
  ceiling_no_led.name = "ceiling_no_led";
  ceiling_no_led.range_true_m = 3.0;
  ceiling_no_led.p_dropout = 0.35;
  ceiling_no_led.dropout_burst_mean = 230.0;
  ceiling_no_led.flow_noise_sigma_rad = 0.0008;
  ceiling_no_led.range_noise_sigma_cm = 2.0;
  ceiling_no_led.quality_good = {100, 200};
  ceiling_no_led.quality_bad = {0, 60};
  ceiling_no_led.description = "white, lightly textured ceiling, unlit";
  presets.push_back(ceiling_no_led);

  ScenarioPreset ceiling_led;
  ceiling_led.name = "ceiling_led";
  ceiling_led.range_true_m = 3.0;
  ceiling_led.p_dropout = 0.7;
  ceiling_led.dropout_burst_mean = 280.0;
  ceiling_led.flow_noise_sigma_rad = 0.0008;
  ceiling_led.range_noise_sigma_cm = 2.0;
  ceiling_led.quality_good = {100, 170};
  ceiling_led.quality_bad = {0, 50};
  ceiling_led.description = "white ceiling washed out by LED glare: features vanish";
  presets.push_back(ceiling_led);

  ScenarioPreset sidewall_led;
  sidewall_led.name = "sidewall_led";
  sidewall_led.range_true_m = 1.5;
  sidewall_led.p_dropout = 1.0;
  sidewall_led.dropout_burst_mean = 1.0;
  sidewall_led.flow_noise_sigma_rad = 0.001;
  sidewall_led.range_noise_sigma_cm = 1.0;
  sidewall_led.quality_good = {100, 140};
  sidewall_led.quality_bad = {0, 30};
  sidewall_led.description = "reflective featureless tiles: flow is always zero";
  presets.push_back(sidewall_led);

  // Mostly-zero regime: structured light yields brief flashes of usable flow.
  // These parameters are a judgment call, not a measured calibration.
  ScenarioPreset sidewall_structured;
  sidewall_structured.name = "sidewall_structured";
  sidewall_structured.range_true_m = 1.5;
  sidewall_structured.p_dropout = 0.95;
  sidewall_structured.dropout_burst_mean = 400.0;
  sidewall_structured.flow_noise_sigma_rad = 0.001;
  sidewall_structured.range_noise_sigma_cm = 1.0;
  sidewall_structured.quality_good = {100, 130};
  sidewall_structured.quality_bad = {0, 40};
  sidewall_structured.description = "featureless tiles with laser pattern and LEDs: rare flow";
  presets.push_back(sidewall_structured);

  return presets;
}

std::optional<ScenarioPreset> find_builtin_preset(std::string_view name) {
  for (auto& preset : builtin_presets()) {
    if (preset.name == name) return preset;
  }
  return std::nullopt;
}

void write_truth(std::ostream& out, std::span<const TruthSample> truth) {
  out << kTruthHeader << '\n';
  for (const auto& sample : truth) {
    out << sample.t << ',' << format_shortest(sample.x_m) << '\n';
  }
}

}  // namespace tunnelflow
