#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunnelflow/flow_odometry.hpp"
#include "tunnelflow/range_model.hpp"
#include "tunnelflow/sensor_types.hpp"
#include "tunnelflow/velocity_predictor.hpp"

namespace tunnelflow {

struct DisplacementReport {
  double total_x = 0.0;     // m
  double total_y = 0.0;     // m
  double total_norm = 0.0;  // m
  std::vector<DisplacementStep> steps;
  std::size_t n_measured = 0;
  std::size_t n_predicted = 0;
  std::size_t n_no_history = 0;
  std::size_t n_unfiltered = 0;
  OdometryConfig config;

  std::size_t processed() const noexcept {
    return n_measured + n_predicted + n_no_history + n_unfiltered;
  }

  bool operator==(const DisplacementReport&) const = default;
};

enum class Algorithm {
  /// Quality-gated: measured velocity when the flow is trustworthy,
  /// extrapolated velocity from the good-sample window otherwise.
  prediction,
  /// Standard optical flow: integrate s = theta * r on every sample.
  baseline,
};

/// A stream error tagged with the 0-based index of the offending record.
class StreamError : public std::runtime_error {
 public:
  StreamError(std::size_t index, const std::string& reason);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Dead-reckoning state for one stream. Single writer; feed records in
/// timestamp order. The first record only anchors time and produces no step.
class OdometryPipeline {
 public:
  explicit OdometryPipeline(OdometryConfig config = {}, Algorithm algorithm = Algorithm::prediction);

  /// Advances the state by one synchronized readout. Returns the resulting
  /// step, or nullopt for the anchoring first record.
  std::optional<DisplacementStep> process_sample(const FlowSample& flow, const RangeSample& range);

  /// Processes records in order; errors are rethrown as StreamError with the
  /// index of the record within `records`.
  void process(std::span<const LogRecord> records);

  const DisplacementReport& report() const noexcept { return report_; }
  const OdometryConfig& config() const noexcept { return config_; }
  Algorithm algorithm() const noexcept { return algorithm_; }

 private:
  DisplacementStep measured_step(const FlowSample& flow, double r_m, double dt_s) const;
  DisplacementStep predicted_step(TimestampUs t, double t_s, double dt_s) const;
  void accumulate(const DisplacementStep& step);

  OdometryConfig config_;
  Algorithm algorithm_;
  RangeCalibration calibration_;
  std::optional<TimestampUs> origin_;
  TimestampUs previous_ = 0;
  GoodSampleWindow window_x_;
  GoodSampleWindow window_y_;
  DisplacementReport report_;
};

/// Folds the quality-gated pipeline over a non-empty stream.
DisplacementReport run_stream(std::span<const LogRecord> records, const OdometryConfig& config);

/// Folds the standard optical-flow integrator over a non-empty stream.
DisplacementReport run_baseline(std::span<const LogRecord> records, const OdometryConfig& config);

}  // namespace tunnelflow
