#include "tunnelflow/velocity_predictor.hpp"

#include <cmath>
#include <string>

namespace tunnelflow {

GoodSampleWindow::GoodSampleWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw ValidationError("window capacity must be >= 1");
}

void GoodSampleWindow::record(double v, double t) {
  if (!std::isfinite(v) || !std::isfinite(t)) {
    throw ValidationError("window entries must be finite");
  }
  if (!entries_.empty() && !(t > entries_.back().t)) {
    throw ValidationError("window timestamp " + std::to_string(t) +
                          " is not after newest entry " + std::to_string(entries_.back().t));
  }
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back({v, t});
}

std::vector<double> back_fit_accelerations(const GoodSampleWindow& window) {
  const auto& e = window.entries();
  std::vector<double> a(e.size(), 0.0);
  if (e.empty()) return a;
  const auto& last = e.back();
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    a[i] = (last.v - e[i].v) / (last.t - e[i].t);
  }
  return a;
}

std::vector<double> extrapolate_velocities(const GoodSampleWindow& window, double t_p) {
  const auto& e = window.entries();
  const std::vector<double> a = back_fit_accelerations(window);
  std::vector<double> predicted(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    predicted[i] = e[i].v + (t_p - e[i].t) * a[i];
  }
  return predicted;
}

std::optional<double> predict_velocity(const GoodSampleWindow& window, double t_p,
                                       Aggregation aggregation) {
  if (window.empty()) return std::nullopt;
  if (!std::isfinite(t_p) || t_p < window.newest().t) {
    throw ValidationError("prediction time precedes newest window entry");
  }
  const std::vector<double> predicted = extrapolate_velocities(window, t_p);
  switch (aggregation) {
    case Aggregation::mean: {
      // Mean as an offset from the newest entry, so identical predictions
      // aggregate to exactly that value.
      const double reference = predicted.back();
      double offset = 0.0;
      for (double p : predicted) offset += p - reference;
      return reference + offset / static_cast<double>(predicted.size());
    }
    case Aggregation::last_fit:
      return predicted.size() >= 2 ? predicted[predicted.size() - 2] : predicted.front();
  }
  return std::nullopt;
}

bool horizon_guard(const GoodSampleWindow& window, double t_p, double max_horizon_s) {
  return t_p - window.newest().t <= max_horizon_s;
}

}  // namespace tunnelflow
