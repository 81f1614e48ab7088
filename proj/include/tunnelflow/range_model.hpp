#pragma once

#include "tunnelflow/sensor_types.hpp"

namespace tunnelflow {

/// Linear rangefinder calibration r = gain * r_raw + offset, in centimeters.
/// Defaults are the tunnel module's published constants.
struct RangeCalibration {
  double gain = 1.07;
  double offset_cm = -100.0;

  static RangeCalibration identity() { return {1.0, 0.0}; }
  static RangeCalibration from_config(const OdometryConfig& config) {
    return {config.range_gain, config.range_offset_cm};
  }

  void validate() const;

  bool operator==(const RangeCalibration&) const = default;
};

/// Calibrated surface distance in centimeters, clamped at zero.
double calibrate_range(double r_raw_cm, const RangeCalibration& cal = {});

/// Raw reading that calibrates to `r_cm` (unclamped inverse); used by the
/// simulator to synthesize rangefinder output.
double raw_range_for(double r_cm, const RangeCalibration& cal = {});

}  // namespace tunnelflow
