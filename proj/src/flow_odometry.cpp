#include "tunnelflow/flow_odometry.hpp"

#include <cmath>

namespace tunnelflow {

namespace {

void check_flow_inputs(double theta_rad, double r_m) {
  if (!std::isfinite(theta_rad)) throw ValidationError("flow angle must be finite");
  if (!std::isfinite(r_m) || r_m < 0.0) throw ValidationError("lever arm must be finite and >= 0");
}

}  // namespace

std::string_view to_string(StepSource source) {
  switch (source) {
    case StepSource::measured:
      return "measured";
    case StepSource::predicted:
      return "predicted";
    case StepSource::no_history:
      return "no_history";
    case StepSource::unfiltered:
      return "unfiltered";
  }
  return "measured";
}

double displacement_increment(double theta_rad, double r_m) {
  check_flow_inputs(theta_rad, r_m);
  return theta_rad * r_m;
}

double velocity_from_flow(double theta_rad, double r_m, double dt_s) {
  check_flow_inputs(theta_rad, r_m);
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
    throw ValidationError("readout interval must be > 0 (duplicate or non-monotonic timestamps)");
  }
  return displacement_increment(theta_rad, r_m) / dt_s;
}

}  // namespace tunnelflow
