#include "tunnelflow/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace tunnelflow::cli {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view text, const std::string& what) {
  T value{};
  text = trim(text);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(what + ": invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                     : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("cannot create output directory '" + dir.string() + "'");
  }
}

std::string names_of(const std::vector<ScenarioPreset>& presets) {
  std::string names;
  for (const auto& p : presets) {
    if (!names.empty()) names += ", ";
    names += p.name;
  }
  return names;
}

void write_config_block(std::ostream& out, const OdometryConfig& config) {
  out << "quality_threshold = " << config.quality_threshold << '\n'
      << "window_len = " << config.window_len << '\n'
      << "range_gain = " << format_shortest(config.range_gain) << '\n'
      << "range_offset_cm = " << format_shortest(config.range_offset_cm) << '\n'
      << "max_prediction_horizon_s = " << format_shortest(config.max_prediction_horizon_s) << '\n'
      << "aggregation = " << to_string(config.aggregation) << '\n';
}

void write_preset_block(std::ostream& out, const ScenarioPreset& p) {
  out << "name = " << p.name << '\n'
      << "range_true_m = " << format_shortest(p.range_true_m) << '\n'
      << "p_dropout = " << format_shortest(p.p_dropout) << '\n'
      << "dropout_burst_mean = " << format_shortest(p.dropout_burst_mean) << '\n'
      << "dropout_burst_max = " << p.dropout_burst_max << '\n'
      << "flow_noise_sigma_rad = " << format_shortest(p.flow_noise_sigma_rad) << '\n'
      << "range_noise_sigma_cm = " << format_shortest(p.range_noise_sigma_cm) << '\n'
      << "quality_good_min = " << p.quality_good.min << '\n'
      << "quality_good_max = " << p.quality_good.max << '\n'
      << "quality_bad_min = " << p.quality_bad.min << '\n'
      << "quality_bad_max = " << p.quality_bad.max << '\n';
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::simulate:
      return "simulate";
    case Command::replay:
      return "replay";
    case Command::compare:
      return "compare";
  }
  return "replay";
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(source + ":" + std::to_string(line_number) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key.empty()) {
      throw InputError(source + ":" + std::to_string(line_number) + ": empty key");
    }
    if (!entries.emplace(key, value).second) {
      throw InputError(source + ":" + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

void apply_config_entries(OdometryConfig& config, const std::map<std::string, std::string>& entries,
                          const std::string& source) {
  for (const auto& [key, value] : entries) {
    const std::string what = source + ": " + key;
    if (key == "quality_threshold") {
      config.quality_threshold = parse_value<int>(value, what);
    } else if (key == "window_len") {
      config.window_len = parse_value<std::size_t>(value, what);
    } else if (key == "range_gain") {
      config.range_gain = parse_value<double>(value, what);
    } else if (key == "range_offset_cm") {
      config.range_offset_cm = parse_value<double>(value, what);
    } else if (key == "max_prediction_horizon_s") {
      config.max_prediction_horizon_s = parse_value<double>(value, what);
    } else if (key == "aggregation") {
      try {
        config.aggregation = parse_aggregation(value);
      } catch (const ValidationError& e) {
        throw InputError(what + ": " + e.what());
      }
    } else {
      throw InputError(source + ": unknown config key '" + key + "'");
    }
  }
}

OdometryConfig resolve_config(const std::optional<fs::path>& config_path,
                              const ConfigOverrides& overrides) {
  OdometryConfig config;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw InputError("cannot open config file '" + config_path->string() + "'");
    apply_config_entries(config, parse_key_values(in, config_path->string()),
                         config_path->string());
    try {
      config.validate();
    } catch (const ValidationError& e) {
      throw InputError(config_path->string() + ": " + e.what());
    }
  }
  if (overrides.quality_threshold) config.quality_threshold = *overrides.quality_threshold;
  if (overrides.window_len) config.window_len = *overrides.window_len;
  if (overrides.range_gain) config.range_gain = *overrides.range_gain;
  if (overrides.range_offset_cm) config.range_offset_cm = *overrides.range_offset_cm;
  if (overrides.max_prediction_horizon_s) {
    config.max_prediction_horizon_s = *overrides.max_prediction_horizon_s;
  }
  try {
    if (overrides.aggregation) config.aggregation = parse_aggregation(*overrides.aggregation);
    config.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return config;
}

MotionProfile parse_profile(std::string_view spec, double duration_s, double rate_hz) {
  const auto parts = split(spec, ':');
  const std::string_view kind = parts.front();
  auto arg = [&](std::size_t i) {
    try {
      return parse_value<double>(parts[i], "profile '" + std::string(spec) + "'");
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  };
  MotionProfile profile;
  if (kind == "constant" && parts.size() == 2) {
    profile = MotionProfile::constant(arg(1), duration_s, rate_hz);
  } else if (kind == "trapezoidal" && parts.size() == 3) {
    profile = MotionProfile::trapezoidal(arg(1), arg(2), duration_s, rate_hz);
  } else if (kind == "sinusoidal" && parts.size() == 3) {
    profile = MotionProfile::sinusoidal(arg(1), arg(2), duration_s, rate_hz);
  } else {
    throw UsageError("bad profile '" + std::string(spec) +
                     "' (expected constant:SPEED, trapezoidal:ACCEL:CRUISE or "
                     "sinusoidal:AMPLITUDE:PERIOD)");
  }
  try {
    profile.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return profile;
}

std::string format_profile(const MotionProfile& profile) {
  std::string text(to_string(profile.kind));
  switch (profile.kind) {
    case ProfileKind::constant_velocity:
      text += ":" + format_shortest(profile.speed_mps);
      break;
    case ProfileKind::trapezoidal:
      text += ":" + format_shortest(profile.accel_mps2) + ":" + format_shortest(profile.cruise_mps);
      break;
    case ProfileKind::sinusoidal:
      text += ":" + format_shortest(profile.amplitude_mps) + ":" + format_shortest(profile.period_s);
      break;
  }
  return text;
}

ScenarioPreset load_preset_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open preset file '" + path.string() + "'");
  const std::string source = path.string();
  const auto entries = parse_key_values(in, source);

  ScenarioPreset preset;
  for (const auto& [key, value] : entries) {
    const std::string what = source + ": " + key;
    if (key == "name") {
      preset.name = value;
    } else if (key == "range_true_m") {
      preset.range_true_m = parse_value<double>(value, what);
    } else if (key == "p_dropout") {
      preset.p_dropout = parse_value<double>(value, what);
    } else if (key == "dropout_burst_mean") {
      preset.dropout_burst_mean = parse_value<double>(value, what);
    } else if (key == "dropout_burst_max") {
      preset.dropout_burst_max = parse_value<std::size_t>(value, what);
    } else if (key == "flow_noise_sigma_rad") {
      preset.flow_noise_sigma_rad = parse_value<double>(value, what);
    } else if (key == "range_noise_sigma_cm") {
      preset.range_noise_sigma_cm = parse_value<double>(value, what);
    } else if (key == "quality_good_min") {
      preset.quality_good.min = parse_value<int>(value, what);
    } else if (key == "quality_good_max") {
      preset.quality_good.max = parse_value<int>(value, what);
    } else if (key == "quality_bad_min") {
      preset.quality_bad.min = parse_value<int>(value, what);
    } else if (key == "quality_bad_max") {
      preset.quality_bad.max = parse_value<int>(value, what);
    } else if (key == "description") {
      preset.description = value;
    } else {
      throw InputError(source + ": unknown preset key '" + key + "'");
    }
  }
  if (preset.name.empty()) preset.name = path.stem().string();
  try {
    preset.validate();
  } catch (const ValidationError& e) {
    throw InputError(source + ": " + e.what());
  }
  return preset;
}

std::vector<ScenarioPreset> resolve_presets(std::string_view names) {
  std::vector<ScenarioPreset> presets;
  const auto builtins = builtin_presets();
  if (trim(names).empty()) {
    throw UsageError("empty preset list; available presets: " + names_of(builtins));
  }
  for (const auto part : split(names, ',')) {
    const auto name = trim(part);
    if (name.empty()) throw UsageError("empty preset name in list '" + std::string(names) + "'");
    auto preset = find_builtin_preset(name);
    if (!preset) {
      throw UsageError("unknown preset '" + std::string(name) +
                       "'; available presets: " + names_of(builtins));
    }
    presets.push_back(std::move(*preset));
  }
  return presets;
}

std::uint64_t preset_seed(std::uint64_t base_seed, std::string_view preset_name) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : preset_name) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return base_seed ^ hash;
}

void write_report(std::ostream& out, const DisplacementReport& report, Algorithm algorithm,
                  const RunManifest& manifest) {
  out << "algorithm: " << (algorithm == Algorithm::prediction ? "prediction" : "baseline") << '\n';
  for (const auto& input : manifest.inputs) out << "input: " << input.string() << '\n';
  out << "total_x_m: " << format_report(report.total_x) << '\n'
      << "total_y_m: " << format_report(report.total_y) << '\n'
      << "total_norm_m: " << format_report(report.total_norm) << '\n'
      << "steps: " << report.steps.size() << '\n'
      << "n_measured: " << report.n_measured << '\n'
      << "n_predicted: " << report.n_predicted << '\n'
      << "n_no_history: " << report.n_no_history << '\n'
      << "n_unfiltered: " << report.n_unfiltered << '\n'
      << "[config]\n";
  write_config_block(out, report.config);
}

void write_series(std::ostream& out, const DisplacementReport& report) {
  out << "t_us,ds_x_m,ds_y_m,cum_x_m,cum_y_m,source\n";
  double cum_x = 0.0;
  double cum_y = 0.0;
  for (const auto& step : report.steps) {
    cum_x += step.ds_x;
    cum_y += step.ds_y;
    out << step.t << ',' << format_shortest(step.ds_x) << ',' << format_shortest(step.ds_y) << ','
        << format_shortest(cum_x) << ',' << format_shortest(cum_y) << ',' << to_string(step.source)
        << '\n';
  }
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
  out << "command = " << to_string(manifest.command) << '\n';
  for (const auto& input : manifest.inputs) out << "input = " << input.string() << '\n';
  out << "out = " << manifest.out_dir.string() << '\n';
  if (manifest.command != Command::replay) {
    out << "seed = " << manifest.seed << '\n';
  }
  if (manifest.profile) {
    out << "profile = " << format_profile(*manifest.profile) << '\n'
        << "duration_s = " << format_shortest(manifest.profile->duration_s) << '\n'
        << "rate_hz = " << format_shortest(manifest.profile->sample_rate_hz) << '\n';
  }
  out << "[config]\n";
  write_config_block(out, manifest.config);
  for (const auto& preset : manifest.presets) {
    out << "[preset]\n";
    if (manifest.command == Command::compare) {
      out << "derived_seed = " << preset_seed(manifest.seed, preset.name) << '\n';
    }
    write_preset_block(out, preset);
  }
}

std::vector<ComparisonRow> compare_presets(const std::vector<ScenarioPreset>& presets,
                                           const MotionProfile& profile, std::uint64_t base_seed,
                                           const OdometryConfig& config) {
  const RangeCalibration calibration = RangeCalibration::from_config(config);
  std::vector<ComparisonRow> rows;
  rows.reserve(presets.size());
  for (const auto& preset : presets) {
    preset.validate(config.quality_threshold);
    ComparisonRow row;
    row.preset = preset.name;
    row.seed = preset_seed(base_seed, preset.name);
    const SimulationResult sim = simulate(profile, preset, row.seed, calibration);
    const DisplacementReport baseline = run_baseline(sim.records, config);
    const DisplacementReport prediction = run_stream(sim.records, config);
    row.dropout_fraction = sim.dropout_fraction();
    row.truth_m = sim.truth_total();
    row.baseline_m = baseline.total_x;
    row.prediction_m = prediction.total_x;
    row.prediction_no_history = prediction.n_no_history;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "preset,seed,dropout_fraction,truth_m,baseline_m,prediction_m\n";
  for (const auto& row : rows) {
    out << row.preset << ',' << row.seed << ',' << format_shortest(row.dropout_fraction) << ','
        << format_shortest(row.truth_m) << ',' << format_shortest(row.baseline_m) << ','
        << format_shortest(row.prediction_m) << '\n';
  }
}

void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  std::size_t name_width = std::string_view("preset").size();
  for (const auto& row : rows) name_width = std::max(name_width, row.preset.size());
  const auto cell = [](std::string text) {
    std::ostringstream s;
    s << std::setw(14) << text;
    return s.str();
  };
  out << std::left << std::setw(static_cast<int>(name_width)) << "preset" << std::right
      << cell("dropout") << cell("truth_m") << cell("standard_m") << cell("prediction_m") << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(static_cast<int>(name_width)) << row.preset << std::right
        << cell(format_report(row.dropout_fraction)) << cell(format_report(row.truth_m))
        << cell(format_report(row.baseline_m)) << cell(format_report(row.prediction_m)) << '\n';
  }
}

int cmd_replay(const fs::path& log_path, const RunManifest& manifest, std::ostream& out) {
  std::vector<LogRecord> records;
  try {
    records = read_log_file(log_path);
  } catch (const LogParseError& e) {
    throw InputError(log_path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
  if (records.empty()) throw InputError(log_path.string() + ": log contains no records");

  DisplacementReport prediction;
  DisplacementReport baseline;
  try {
    prediction = run_stream(records, manifest.config);
    baseline = run_baseline(records, manifest.config);
  } catch (const StreamError& e) {
    throw InputError(log_path.string() + ": " + e.what());
  }

  ensure_directory(manifest.out_dir);
  {
    auto f = open_output(manifest.out_dir / "report.txt");
    write_report(f, prediction, Algorithm::prediction, manifest);
  }
  {
    auto f = open_output(manifest.out_dir / "series.csv");
    write_series(f, prediction);
  }
  {
    auto f = open_output(manifest.out_dir / "report_baseline.txt");
    write_report(f, baseline, Algorithm::baseline, manifest);
  }
  {
    auto f = open_output(manifest.out_dir / "series_baseline.csv");
    write_series(f, baseline);
  }
  out << "prediction total_x_m: " << format_report(prediction.total_x)
      << "  total_norm_m: " << format_report(prediction.total_norm) << '\n'
      << "standard   total_x_m: " << format_report(baseline.total_x)
      << "  total_norm_m: " << format_report(baseline.total_norm) << '\n';
  return kExitOk;
}

int cmd_simulate(const RunManifest& manifest, std::ostream& out) {
  if (!manifest.profile) throw UsageError("simulate requires a motion profile");
  if (manifest.presets.size() != 1) throw UsageError("simulate takes exactly one preset");
  const ScenarioPreset& preset = manifest.presets.front();
  try {
    preset.validate(manifest.config.quality_threshold);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const SimulationResult sim = simulate(*manifest.profile, preset, manifest.seed,
                                        RangeCalibration::from_config(manifest.config));

  ensure_directory(manifest.out_dir);
  {
    auto f = open_output(manifest.out_dir / "log.csv");
    write_log(f, sim.records);
  }
  {
    auto f = open_output(manifest.out_dir / "truth.csv");
    write_truth(f, sim.truth);
  }
  {
    auto f = open_output(manifest.out_dir / "manifest.txt");
    write_manifest(f, manifest);
  }
  out << "records: " << sim.records.size() << '\n'
      << "dropout fraction: " << format_report(sim.dropout_fraction()) << '\n'
      << "truth total: " << format_report(sim.truth_total()) << " m\n";
  return kExitOk;
}

int cmd_compare(const RunManifest& manifest, std::ostream& out) {
  if (!manifest.profile) throw UsageError("compare requires a motion profile");
  if (manifest.presets.empty()) throw UsageError("compare requires at least one preset");
  std::vector<ComparisonRow> rows;
  try {
    rows = compare_presets(manifest.presets, *manifest.profile, manifest.seed, manifest.config);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  ensure_directory(manifest.out_dir);
  {
    auto f = open_output(manifest.out_dir / "table.csv");
    write_comparison_csv(f, rows);
  }
  {
    auto f = open_output(manifest.out_dir / "table.txt");
    write_comparison_text(f, rows);
  }
  {
    auto f = open_output(manifest.out_dir / "manifest.txt");
    write_manifest(f, manifest);
  }
  write_comparison_text(out, rows);
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quality-gated optical-flow odometry with velocity prediction"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string profile_spec = "constant:0.5";
  double duration_s = 100.0;
  double rate_hz = 20.0;
  std::optional<std::string> preset_names;
  std::optional<std::string> preset_file;
  std::vector<std::string> compare_preset_files;
  std::string log_path;
  ConfigOverrides overrides;

  const auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--quality-threshold", overrides.quality_threshold);
    sub->add_option("--window-len", overrides.window_len);
    sub->add_option("--aggregation", overrides.aggregation, "mean | last_fit");
    sub->add_option("--max-horizon", overrides.max_prediction_horizon_s, "seconds");
    sub->add_option("--range-gain", overrides.range_gain);
    sub->add_option("--range-offset-cm", overrides.range_offset_cm);
  };
  const auto add_sim_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", seed);
    sub->add_option("--profile", profile_spec, "KIND:ARGS");
    sub->add_option("--duration", duration_s, "seconds");
    sub->add_option("--rate", rate_hz, "Hz");
    sub->add_option("--preset", preset_names, "NAME[,NAME...]");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic log and ground truth");
  add_config_flags(simulate_cmd);
  add_sim_flags(simulate_cmd);
  simulate_cmd->add_option("--preset-file", preset_file, "scenario preset in key = value form");

  auto* replay_cmd = app.add_subcommand("replay", "run both integrators over a recorded log");
  add_config_flags(replay_cmd);
  replay_cmd->add_option("log", log_path, "log CSV")->required();

  auto* compare_cmd = app.add_subcommand("compare", "standard vs prediction over presets");
  add_config_flags(compare_cmd);
  add_sim_flags(compare_cmd);
  compare_cmd->add_option("--preset-file", compare_preset_files,
                          "additional scenario preset file (repeatable)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunManifest manifest;
    manifest.out_dir = out_dir;
    manifest.seed = seed;
    manifest.config = resolve_config(
        config_path ? std::optional<fs::path>(*config_path) : std::nullopt, overrides);
    if (config_path) manifest.inputs.emplace_back(*config_path);

    if (replay_cmd->parsed()) {
      manifest.command = Command::replay;
      manifest.inputs.emplace_back(log_path);
      return cmd_replay(log_path, manifest, out);
    }

    manifest.profile = parse_profile(profile_spec, duration_s, rate_hz);
    if (simulate_cmd->parsed()) {
      manifest.command = Command::simulate;
      if (preset_file && preset_names) {
        throw UsageError("give either --preset or --preset-file, not both");
      }
      if (preset_file) {
        manifest.inputs.emplace_back(*preset_file);
        manifest.presets.push_back(load_preset_file(*preset_file));
      } else {
        manifest.presets = resolve_presets(preset_names.value_or("floor_led"));
      }
      return cmd_simulate(manifest, out);
    }

    manifest.command = Command::compare;
    if (preset_names) {
      manifest.presets = resolve_presets(*preset_names);
    } else if (compare_preset_files.empty()) {
      manifest.presets = builtin_presets();
    }
    for (const auto& file : compare_preset_files) {
      manifest.inputs.emplace_back(file);
      manifest.presets.push_back(load_preset_file(file));
    }
    return cmd_compare(manifest, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace tunnelflow::cli
