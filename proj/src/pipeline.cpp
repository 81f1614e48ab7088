#include "tunnelflow/pipeline.hpp"

#include <cmath>

namespace tunnelflow {

namespace {

constexpr double kSecondsPerMicrosecond = 1e-6;

OdometryConfig validated(OdometryConfig config) {
  config.validate();
  return config;
}

DisplacementReport run(std::span<const LogRecord> records, const OdometryConfig& config,
                       Algorithm algorithm) {
  if (records.empty()) throw ValidationError("stream must contain at least one record");
  OdometryPipeline pipeline(config, algorithm);
  pipeline.process(records);
  return pipeline.report();
}

}  // namespace

StreamError::StreamError(std::size_t index, const std::string& reason)
    : std::runtime_error("record " + std::to_string(index) + ": " + reason), index_(index) {}

OdometryPipeline::OdometryPipeline(OdometryConfig config, Algorithm algorithm)
    : config_(validated(config)),
      algorithm_(algorithm),
      calibration_(RangeCalibration::from_config(config_)),
      window_x_(config_.window_len),
      window_y_(config_.window_len) {
  report_.config = config_;
}

std::optional<DisplacementStep> OdometryPipeline::process_sample(const FlowSample& flow,
                                                                 const RangeSample& range) {
  if (flow.t != range.t) {
    throw ValidationError("flow timestamp " + std::to_string(flow.t) +
                          " does not match range timestamp " + std::to_string(range.t));
  }
  if (!origin_) {
    // Validate the anchor like any other sample; its flow has no interval.
    calibrate_range(range.r_raw_cm, calibration_);
    origin_ = flow.t;
    previous_ = flow.t;
    return std::nullopt;
  }
  if (flow.t <= previous_) {
    throw ValidationError("non-monotonic timestamp " + std::to_string(flow.t) + " after " +
                          std::to_string(previous_));
  }

  const double dt_s = static_cast<double>(flow.t - previous_) * kSecondsPerMicrosecond;
  const double t_s = static_cast<double>(flow.t - *origin_) * kSecondsPerMicrosecond;
  const double r_m = centimeters_to_meters(calibrate_range(range.r_raw_cm, calibration_));
  const bool good = flow.quality >= config_.quality_threshold;

  DisplacementStep step;
  if (algorithm_ == Algorithm::baseline) {
    step = measured_step(flow, r_m, dt_s);
    if (!good) step.source = StepSource::unfiltered;
  } else if (good) {
    step = measured_step(flow, r_m, dt_s);
    window_x_.record(step.v_x, t_s);
    window_y_.record(step.v_y, t_s);
  } else {
    step = predicted_step(flow.t, t_s, dt_s);
  }

  previous_ = flow.t;
  accumulate(step);
  return step;
}

DisplacementStep OdometryPipeline::measured_step(const FlowSample& flow, double r_m,
                                                 double dt_s) const {
  DisplacementStep step;
  step.t = flow.t;
  step.ds_x = displacement_increment(flow.theta_x, r_m);
  step.ds_y = displacement_increment(flow.theta_y, r_m);
  step.v_x = velocity_from_flow(flow.theta_x, r_m, dt_s);
  step.v_y = velocity_from_flow(flow.theta_y, r_m, dt_s);
  step.source = StepSource::measured;
  return step;
}

DisplacementStep OdometryPipeline::predicted_step(TimestampUs t, double t_s, double dt_s) const {
  DisplacementStep step;
  step.t = t;
  if (window_x_.empty()) {
    step.source = StepSource::no_history;
    return step;
  }
  step.source = StepSource::predicted;
  // Both windows are filled by the same gate, so they share timestamps.
  if (horizon_guard(window_x_, t_s, config_.max_prediction_horizon_s)) {
    step.v_x = *predict_velocity(window_x_, t_s, config_.aggregation);
    step.v_y = *predict_velocity(window_y_, t_s, config_.aggregation);
  }
  step.ds_x = step.v_x * dt_s;
  step.ds_y = step.v_y * dt_s;
  return step;
}

void OdometryPipeline::accumulate(const DisplacementStep& step) {
  report_.total_x += step.ds_x;
  report_.total_y += step.ds_y;
  report_.total_norm = std::hypot(report_.total_x, report_.total_y);
  switch (step.source) {
    case StepSource::measured:
      ++report_.n_measured;
      break;
    case StepSource::predicted:
      ++report_.n_predicted;
      break;
    case StepSource::no_history:
      ++report_.n_no_history;
      break;
    case StepSource::unfiltered:
      ++report_.n_unfiltered;
      break;
  }
  report_.steps.push_back(step);
}

void OdometryPipeline::process(std::span<const LogRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      process_sample(records[i].flow, records[i].range);
    } catch (const std::exception& e) {
      throw StreamError(i, e.what());
    }
  }
}

DisplacementReport run_stream(std::span<const LogRecord> records, const OdometryConfig& config) {
  return run(records, config, Algorithm::prediction);
}

DisplacementReport run_baseline(std::span<const LogRecord> records, const OdometryConfig& config) {
  return run(records, config, Algorithm::baseline);
}

}  // namespace tunnelflow
