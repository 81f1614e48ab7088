#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tunnelflow/pipeline.hpp"

using namespace tunnelflow;
using tunnelflow::testing::bit_identical;
using tunnelflow::testing::random_stream;

namespace {

OdometryConfig identity_range_config() {
  OdometryConfig c;
  c.range_gain = 1.0;
  c.range_offset_cm = 0.0;
  return c;
}

LogRecord record(TimestampUs t, double theta_x, int quality, double r_raw_cm = 200.0,
                 double theta_y = 0.0) {
  return LogRecord{FlowSample{t, theta_x, theta_y, quality}, RangeSample{t, r_raw_cm}};
}

// 20 Hz stream at constant speed over a surface 2 m away (identity range).
std::vector<LogRecord> constant_speed_stream(double speed, double seconds,
                                             const std::vector<bool>& dropout = {}) {
  constexpr double r_m = 2.0;
  constexpr TimestampUs dt_us = 50'000;
  const auto n = static_cast<std::size_t>(std::llround(seconds * 20.0));
  std::vector<LogRecord> records;
  for (std::size_t k = 0; k <= n; ++k) {
    const bool bad = k < dropout.size() && dropout[k];
    const double theta = k == 0 || bad ? 0.0 : speed * 0.05 / r_m;
    records.push_back(record(static_cast<TimestampUs>(k) * dt_us, theta, bad ? 30 : 180));
  }
  return records;
}

double sum_ds_x(const DisplacementReport& r) {
  double s = 0.0;
  for (const auto& step : r.steps) s += step.ds_x;
  return s;
}

}  // namespace

TEST(ProcessSample, MeasuredStep) {
  OdometryPipeline p(identity_range_config());
  EXPECT_FALSE(p.process_sample({0, 0.0, 0.0, 180}, {0, 200.0}).has_value());
  const auto step = p.process_sample({50'000, 0.05, 0.0, 180}, {50'000, 200.0});
  ASSERT_TRUE(step);
  EXPECT_EQ(step->source, StepSource::measured);
  EXPECT_DOUBLE_EQ(step->v_x, 2.0);
  EXPECT_DOUBLE_EQ(step->ds_x, 0.1);
}

TEST(ProcessSample, GateBoundaryIsGood) {
  OdometryPipeline p(identity_range_config());
  p.process_sample({0, 0.0, 0.0, 100}, {0, 200.0});
  EXPECT_EQ(p.process_sample({50'000, 0.05, 0.0, 100}, {50'000, 200.0})->source,
            StepSource::measured);
  EXPECT_EQ(p.process_sample({100'000, 0.05, 0.0, 99}, {100'000, 200.0})->source,
            StepSource::predicted);
}

TEST(ProcessSample, PredictedStepFromConstantHistory) {
  OdometryPipeline p(identity_range_config());
  for (int k = 0; k < 6; ++k) {
    p.process_sample({k * 50'000, k == 0 ? 0.0 : 0.05, 0.0, 180}, {k * 50'000, 200.0});
  }
  const auto step = p.process_sample({300'000, 0.0, 0.0, 40}, {300'000, 200.0});
  ASSERT_TRUE(step);
  EXPECT_EQ(step->source, StepSource::predicted);
  EXPECT_DOUBLE_EQ(step->v_x, 2.0);
  EXPECT_DOUBLE_EQ(step->ds_x, 0.1);
}

TEST(ProcessSample, LowQualityWithoutHistory) {
  OdometryPipeline p(identity_range_config());
  p.process_sample({0, 0.0, 0.0, 40}, {0, 200.0});
  const auto step = p.process_sample({50'000, 0.3, 0.0, 40}, {50'000, 200.0});
  ASSERT_TRUE(step);
  EXPECT_EQ(step->source, StepSource::no_history);
  EXPECT_EQ(step->ds_x, 0.0);
  EXPECT_EQ(step->v_x, 0.0);
}

TEST(ProcessSample, HorizonFreezesPrediction) {
  OdometryConfig c = identity_range_config();
  c.max_prediction_horizon_s = 0.1;
  OdometryPipeline p(c);
  p.process_sample({0, 0.0, 0.0, 180}, {0, 200.0});
  p.process_sample({50'000, 0.05, 0.0, 180}, {50'000, 200.0});
  EXPECT_DOUBLE_EQ(p.process_sample({100'000, 0.0, 0.0, 10}, {100'000, 200.0})->v_x, 2.0);
  EXPECT_DOUBLE_EQ(p.process_sample({150'000, 0.0, 0.0, 10}, {150'000, 200.0})->v_x, 2.0);
  const auto frozen = p.process_sample({200'000, 0.0, 0.0, 10}, {200'000, 200.0});
  EXPECT_EQ(frozen->source, StepSource::predicted);
  EXPECT_EQ(frozen->v_x, 0.0);
  EXPECT_EQ(frozen->ds_x, 0.0);
}

TEST(ProcessSample, LastFitAggregation) {
  OdometryConfig c = identity_range_config();
  c.aggregation = Aggregation::last_fit;
  OdometryPipeline p(c);
  // Velocities 1, 2, 3 m/s at t = 1, 2, 3 s (theta * 2 m / 1 s).
  p.process_sample({0, 0.0, 0.0, 180}, {0, 200.0});
  for (int k = 1; k <= 3; ++k) {
    p.process_sample({k * 1'000'000LL, 0.5 * k, 0.0, 180}, {k * 1'000'000LL, 200.0});
  }
  const auto step = p.process_sample({4'000'000, 0.0, 0.0, 10}, {4'000'000, 200.0});
  // v_predicted[L-1] = 2 + (4 - 2) * 1 = 4
  EXPECT_DOUBLE_EQ(step->v_x, 4.0);
}

TEST(ProcessSample, Errors) {
  OdometryPipeline p;
  EXPECT_THROW(p.process_sample({0, 0.0, 0.0, 180}, {1, 200.0}), ValidationError);
  p.process_sample({10, 0.0, 0.0, 180}, {10, 200.0});
  EXPECT_THROW(p.process_sample({10, 0.0, 0.0, 180}, {10, 200.0}), ValidationError);
  EXPECT_THROW(p.process_sample({5, 0.0, 0.0, 180}, {5, 200.0}), ValidationError);
}

TEST(RunStream, ErrorsCarryRecordIndex) {
  auto records = constant_speed_stream(0.5, 1.0);
  records[7].range.t += 1;
  try {
    run_stream(records, {});
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.index(), 7u);
  }
  EXPECT_THROW(run_stream({}, {}), ValidationError);
  OdometryConfig bad;
  bad.window_len = 0;
  EXPECT_THROW(run_stream(constant_speed_stream(0.5, 1.0), bad), ValidationError);
}

TEST(RunStream, ZeroFlowGivesZeroTotals) {
  const auto records = constant_speed_stream(0.0, 10.0);
  const auto r = run_stream(records, identity_range_config());
  EXPECT_EQ(r.total_x, 0.0);
  EXPECT_EQ(r.total_norm, 0.0);
  EXPECT_EQ(r.n_measured, records.size() - 1);
}

TEST(RunStream, ConstantSpeedFiftyMeters) {
  const auto r = run_stream(constant_speed_stream(0.5, 100.0), identity_range_config());
  EXPECT_NEAR(r.total_norm, 50.0, 50.0 * 1e-9);
  EXPECT_EQ(r.steps.size(), 2000u);
  EXPECT_EQ(r.config, identity_range_config());
}

TEST(RunStream, AllLowQualityNeverFormsHistory) {
  const auto r = run_stream(constant_speed_stream(0.5, 100.0, std::vector<bool>(2001, true)),
                            identity_range_config());
  EXPECT_EQ(r.total_x, 0.0);
  EXPECT_EQ(r.n_no_history, 2000u);
  EXPECT_EQ(r.n_measured + r.n_predicted, 0u);
}

TEST(RunStream, TotalsEqualOrderedStepSum) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = run_stream(random_stream(rng, 200, 0.3), {});
    EXPECT_EQ(r.total_x, sum_ds_x(r));
    EXPECT_EQ(r.processed(), r.steps.size());
    EXPECT_EQ(r.n_unfiltered, 0u);
  }
}

TEST(RunBaseline, NoDropoutMatchesStream) {
  const auto records = constant_speed_stream(0.5, 100.0);
  EXPECT_TRUE(bit_identical(run_baseline(records, identity_range_config()),
                            run_stream(records, identity_range_config())));
}

TEST(RunBaseline, DropoutScalesTotalByGoodFraction) {
  std::mt19937_64 rng(99);
  std::bernoulli_distribution drop(0.3);
  std::vector<bool> mask(2001);
  std::size_t dropped_steps = 0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask[k] = drop(rng);
    if (k > 0 && mask[k]) ++dropped_steps;
  }
  const auto r = run_baseline(constant_speed_stream(0.5, 100.0, mask), identity_range_config());
  const double p = static_cast<double>(dropped_steps) / 2000.0;
  EXPECT_NEAR(r.total_x, (1.0 - p) * 50.0, 50.0 * 1e-9);
  EXPECT_EQ(r.n_unfiltered, dropped_steps);
  EXPECT_EQ(r.n_predicted + r.n_no_history, 0u);
}

TEST(RunBaseline, AllDropoutIsZero) {
  const auto r = run_baseline(constant_speed_stream(0.5, 10.0, std::vector<bool>(201, true)),
                              identity_range_config());
  EXPECT_EQ(r.total_x, 0.0);
}

TEST(PipelineProperty, GateEquivalenceOnCleanStreams) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = random_stream(rng, 1 + rng() % 300, 0.0);
    OdometryConfig c;
    c.window_len = 1 + rng() % 12;
    c.aggregation = rng() % 2 ? Aggregation::mean : Aggregation::last_fit;
    ASSERT_TRUE(bit_identical(run_stream(records, c), run_baseline(records, c)));
  }
}

TEST(PipelineProperty, AdditivityAcrossSplits) {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = random_stream(rng, 2 + rng() % 300, 0.4);
    const std::size_t split = rng() % (records.size() + 1);
    const std::span<const LogRecord> all(records);
    for (auto algorithm : {Algorithm::prediction, Algorithm::baseline}) {
      OdometryPipeline continued({}, algorithm);
      continued.process(all.first(split));
      continued.process(all.subspan(split));
      OdometryPipeline whole({}, algorithm);
      whole.process(all);
      ASSERT_TRUE(bit_identical(continued.report(), whole.report()));
    }
  }
}

TEST(PipelineProperty, ConstantVelocityDropoutExactness) {
  std::mt19937_64 rng(4321);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_real_distribution<double> speed(-2.0, 2.0);
    std::uniform_int_distribution<int> burst(1, 39);  // < 2 s at 20 Hz
    std::uniform_int_distribution<int> good(1, 30);
    const double v = speed(rng);
    std::vector<bool> mask(2001, false);
    // At least one good step after the anchor before the first dropout.
    std::size_t k = 1 + static_cast<std::size_t>(good(rng));
    while (k < mask.size()) {
      const int len = burst(rng);
      for (int i = 0; i < len && k < mask.size(); ++i) mask[k++] = true;
      k += static_cast<std::size_t>(good(rng));
    }
    const auto r = run_stream(constant_speed_stream(v, 100.0, mask), identity_range_config());
    const double truth = v * 100.0;
    ASSERT_NEAR(r.total_x, truth, std::abs(truth) * 1e-9 + 1e-12);
    ASSERT_EQ(r.n_no_history, 0u);
  }
}

TEST(PipelineProperty, BaselineNeverExceedsPredictionForNonDecreasingSpeed) {
  // Non-decreasing, non-negative speed keeps every back-fitted acceleration
  // and therefore every extrapolated velocity non-negative.
  std::mt19937_64 rng(2468);
  std::uniform_real_distribution<double> accel(0.0, 0.02);
  std::bernoulli_distribution drop(0.25);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LogRecord> records;
    double speed = 0.1;
    bool has_good = false;
    for (int k = 0; k <= 400; ++k) {
      const bool bad = k > 1 && has_good && drop(rng);
      const double theta = (k == 0 || bad) ? 0.0 : speed * 0.05 / 2.0;
      records.push_back(record(k * 50'000LL, theta, bad ? 20 : 200));
      if (k > 0 && !bad) has_good = true;
      speed += accel(rng);
    }
    const auto pred = run_stream(records, identity_range_config());
    const auto base = run_baseline(records, identity_range_config());
    ASSERT_LE(base.total_x, pred.total_x);
  }
}

TEST(PipelineProperty, CounterConsistency) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const auto records = random_stream(rng, 1 + rng() % 200, 0.5);
    std::size_t good = 0;
    for (std::size_t i = 1; i < records.size(); ++i) good += records[i].flow.quality >= 100;
    const auto pred = run_stream(records, {});
    EXPECT_EQ(pred.n_measured, good);
    EXPECT_EQ(pred.processed(), records.size() - 1);
    const auto base = run_baseline(records, {});
    EXPECT_EQ(base.n_measured, good);
    EXPECT_EQ(base.n_unfiltered, records.size() - 1 - good);
  }
}
