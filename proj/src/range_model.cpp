#include "tunnelflow/range_model.hpp"

#include <algorithm>
#include <cmath>

namespace tunnelflow {

void RangeCalibration::validate() const {
  if (!std::isfinite(gain) || gain <= 0.0) throw ValidationError("range gain must be finite and > 0");
  if (!std::isfinite(offset_cm)) throw ValidationError("range offset must be finite");
}

double calibrate_range(double r_raw_cm, const RangeCalibration& cal) {
  if (!std::isfinite(r_raw_cm) || r_raw_cm < 0.0) {
    throw ValidationError("raw range must be finite and >= 0");
  }
  cal.validate();
  return std::max(0.0, cal.gain * r_raw_cm + cal.offset_cm);
}

double raw_range_for(double r_cm, const RangeCalibration& cal) {
  cal.validate();
  return (r_cm - cal.offset_cm) / cal.gain;
}

}  // namespace tunnelflow
