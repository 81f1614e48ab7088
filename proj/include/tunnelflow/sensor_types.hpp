#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tunnelflow {

using TimestampUs = std::int64_t;

inline constexpr int kQualityMin = 0;
inline constexpr int kQualityMax = 255;

/// One flow-sensor readout. theta_* is the angular flow accumulated since
/// the previous readout, already rotation-compensated by the sensor.
struct FlowSample {
  TimestampUs t = 0;
  double theta_x = 0.0;
  double theta_y = 0.0;
  int quality = 0;

  bool operator==(const FlowSample&) const = default;
};

struct RangeSample {
  TimestampUs t = 0;
  double r_raw_cm = 0.0;

  bool operator==(const RangeSample&) const = default;
};

/// One row of the log: flow and range are co-timestamped.
struct LogRecord {
  FlowSample flow;
  RangeSample range;

  bool operator==(const LogRecord&) const = default;
};

enum class Aggregation { mean, last_fit };

std::string_view to_string(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view text);

struct OdometryConfig {
  int quality_threshold = 100;
  std::size_t window_len = 8;
  double range_gain = 1.07;
  double range_offset_cm = -100.0;
  double max_prediction_horizon_s = 2.0;
  Aggregation aggregation = Aggregation::mean;

  /// Throws ValidationError when any field is out of its domain.
  void validate() const;

  bool operator==(const OdometryConfig&) const = default;
};

/// A value or argument outside its documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A log line that cannot be accepted. Carries the 1-based physical line
/// number and the name of the offending field ("record" for shape errors).
class LogParseError : public std::runtime_error {
 public:
  LogParseError(std::size_t line, std::string field, const std::string& reason);

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

inline constexpr std::string_view kLogHeader = "t_us,theta_x_rad,theta_y_rad,quality,r_raw_cm";

/// Parses one CSV data row. Validates every field against the sample
/// invariants; does not check ordering against other rows.
LogRecord parse_log_record(std::string_view line, std::size_t line_number = 1);

/// Reads a whole log. The header row is optional on input; blank lines are
/// skipped. Timestamps must be strictly increasing.
std::vector<LogRecord> read_log(std::istream& in);
std::vector<LogRecord> read_log_file(const std::filesystem::path& path);

std::string format_log_record(const LogRecord& record);
void write_log(std::ostream& out, std::span<const LogRecord> records);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_shortest(double value);

/// `value` with 6 significant digits, for human-readable reports.
std::string format_report(double value);

}  // namespace tunnelflow
