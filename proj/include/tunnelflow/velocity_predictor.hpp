#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "tunnelflow/sensor_types.hpp"

namespace tunnelflow {

/// The last `capacity` good-quality velocities of one axis, oldest first.
/// Timestamps are seconds and strictly increasing.
class GoodSampleWindow {
 public:
  struct Entry {
    double v = 0.0;  // m/s
    double t = 0.0;  // s

    bool operator==(const Entry&) const = default;
  };

  explicit GoodSampleWindow(std::size_t capacity = 8);

  /// Appends (v, t), evicting the oldest entry when full. Throws
  /// ValidationError if t is not after the newest entry.
  void record(double v, double t);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Entry& newest() const { return entries_.back(); }
  const std::deque<Entry>& entries() const noexcept { return entries_; }

  bool operator==(const GoodSampleWindow&) const = default;

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

/// a[i] = (v[L] - v[i]) / (t[L] - t[i]) for i < L, a[L] = 0, where L is the
/// newest entry. Empty for an empty window.
std::vector<double> back_fit_accelerations(const GoodSampleWindow& window);

/// v_predicted[i] = v[i] + (t_p - t[i]) * a[i] for every window entry.
std::vector<double> extrapolate_velocities(const GoodSampleWindow& window, double t_p);

/// Aggregated velocity prediction at time t_p. Returns nullopt when the
/// window holds no history. Throws ValidationError if t_p precedes the
/// newest entry.
std::optional<double> predict_velocity(const GoodSampleWindow& window, double t_p,
                                       Aggregation aggregation = Aggregation::mean);

/// True while t_p is no further than max_horizon_s past the newest entry.
bool horizon_guard(const GoodSampleWindow& window, double t_p, double max_horizon_s);

}  // namespace tunnelflow
