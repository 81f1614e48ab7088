#pragma once

#include <string_view>

#include "tunnelflow/sensor_types.hpp"

namespace tunnelflow {

/// Where a step's velocity came from. `unfiltered` is only produced by the
/// baseline integrator for samples below the quality threshold.
enum class StepSource { measured, predicted, no_history, unfiltered };

std::string_view to_string(StepSource source);

struct DisplacementStep {
  TimestampUs t = 0;
  double ds_x = 0.0;  // m
  double ds_y = 0.0;  // m
  double v_x = 0.0;   // m/s
  double v_y = 0.0;   // m/s
  StepSource source = StepSource::measured;

  bool operator==(const DisplacementStep&) const = default;
};

constexpr double centimeters_to_meters(double cm) { return cm / 100.0; }

/// s = theta * r, with theta in radians and the lever arm r in meters.
double displacement_increment(double theta_rad, double r_m);

/// Mean velocity over a readout interval of dt_s seconds.
double velocity_from_flow(double theta_rad, double r_m, double dt_s);

}  // namespace tunnelflow
