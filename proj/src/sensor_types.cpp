#include "tunnelflow/sensor_types.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

namespace tunnelflow {

namespace {

constexpr std::array<std::string_view, 5> kFieldNames = {"t_us", "theta_x_rad", "theta_y_rad",
                                                         "quality", "r_raw_cm"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, std::string_view field) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec == std::errc::invalid_argument || ptr != last) {
    throw LogParseError(line, std::string(field), "non-numeric value '" + std::string(text) + "'");
  }
  if (ec == std::errc::result_out_of_range) {
    throw LogParseError(line, std::string(field), "value out of range '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::mean:
      return "mean";
    case Aggregation::last_fit:
      return "last_fit";
  }
  return "mean";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "mean") return Aggregation::mean;
  if (text == "last_fit") return Aggregation::last_fit;
  throw ValidationError("unknown aggregation '" + std::string(text) + "' (expected mean|last_fit)");
}

void OdometryConfig::validate() const {
  if (quality_threshold < kQualityMin || quality_threshold > kQualityMax) {
    throw ValidationError("quality_threshold must be in [0, 255]");
  }
  if (window_len < 1) {
    throw ValidationError("window_len must be >= 1");
  }
  if (!std::isfinite(range_gain) || range_gain <= 0.0) {
    throw ValidationError("range_gain must be finite and > 0");
  }
  if (!std::isfinite(range_offset_cm)) {
    throw ValidationError("range_offset_cm must be finite");
  }
  if (!std::isfinite(max_prediction_horizon_s) || max_prediction_horizon_s <= 0.0) {
    throw ValidationError("max_prediction_horizon_s must be finite and > 0");
  }
}

LogParseError::LogParseError(std::size_t line, std::string field, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ", field " + field + ": " + reason),
      line_(line),
      field_(std::move(field)) {}

LogRecord parse_log_record(std::string_view line, std::size_t line_number) {
  line = trim(line);
  std::array<std::string_view, kFieldNames.size()> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view token =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (count < fields.size()) fields[count] = trim(token);
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != fields.size()) {
    throw LogParseError(line_number, "record",
                        "expected 5 fields, found " + std::to_string(count));
  }

  LogRecord record;
  const auto t = parse_number<TimestampUs>(fields[0], line_number, kFieldNames[0]);
  const auto theta_x = parse_number<double>(fields[1], line_number, kFieldNames[1]);
  const auto theta_y = parse_number<double>(fields[2], line_number, kFieldNames[2]);
  const auto quality = parse_number<int>(fields[3], line_number, kFieldNames[3]);
  const auto r_raw = parse_number<double>(fields[4], line_number, kFieldNames[4]);

  if (!std::isfinite(theta_x)) throw LogParseError(line_number, "theta_x_rad", "not finite");
  if (!std::isfinite(theta_y)) throw LogParseError(line_number, "theta_y_rad", "not finite");
  if (quality < kQualityMin || quality > kQualityMax) {
    throw LogParseError(line_number, "quality",
                        "quality out of range [0, 255]: " + std::to_string(quality));
  }
  if (!std::isfinite(r_raw) || r_raw < 0.0) {
    throw LogParseError(line_number, "r_raw_cm", "must be finite and >= 0");
  }

  record.flow = FlowSample{t, theta_x, theta_y, quality};
  record.range = RangeSample{t, r_raw};
  return record;
}

std::vector<LogRecord> read_log(std::istream& in) {
  std::vector<LogRecord> records;
  std::string line;
  std::size_t line_number = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (first_content) {
      first_content = false;
      if (view == kLogHeader) continue;
    }
    LogRecord record = parse_log_record(view, line_number);
    if (!records.empty() && record.flow.t <= records.back().flow.t) {
      throw LogParseError(line_number, "t_us",
                          "non-monotonic timestamp " + std::to_string(record.flow.t) +
                              " after " + std::to_string(records.back().flow.t));
    }
    records.push_back(record);
  }
  return records;
}

std::vector<LogRecord> read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open log file '" + path.string() + "'");
  }
  return read_log(in);
}

std::string format_shortest(double value) {
  std::array<char, 64> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buffer.data(), ptr);
}

std::string format_report(double value) {
  std::array<char, 64> buffer{};
  const int n = std::snprintf(buffer.data(), buffer.size(), "%.6g", value);
  return std::string(buffer.data(), static_cast<std::size_t>(n));
}

std::string format_log_record(const LogRecord& record) {
  std::string line = std::to_string(record.flow.t);
  line += ',';
  line += format_shortest(record.flow.theta_x);
  line += ',';
  line += format_shortest(record.flow.theta_y);
  line += ',';
  line += std::to_string(record.flow.quality);
  line += ',';
  line += format_shortest(record.range.r_raw_cm);
  return line;
}

void write_log(std::ostream& out, std::span<const LogRecord> records) {
  out << kLogHeader << '\n';
  for (const auto& record : records) {
    out << format_log_record(record) << '\n';
  }
}

}  // namespace tunnelflow
