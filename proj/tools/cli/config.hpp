#pragma once

// Run configuration for the `simulate` front end. Files are a TOML subset:
// five sections plus an optional top-level `preset` to start from.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fuse/attacks.hpp"
#include "fuse/errors.hpp"
#include "fuse/physics.hpp"
#include "fuse/qkd.hpp"
#include "fuse/sources.hpp"

namespace fuse::cli {

struct ConfigIssue {
  std::string path;  // dotted key path, e.g. "scenario.span_pm"
  std::string message;
};

/// Every problem found in one config, not just the first.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

enum class ScenarioKind { static_power, sweep, timeseries, skr_power, skr_distance, spectrum };

std::string_view to_string(ScenarioKind kind);

struct PrConfig {
  std::optional<std::filesystem::path> anchors_file;
  std::optional<pr::PrModel> model;  // explicit model; exclusive with anchors_file
  double dt_s = 0.01;
};

struct QkdConfig {
  qkd::ChannelModel channel;
  qkd::DecoyParams decoy;
  /// Solve detector efficiency, e_d and dark counts from `targets` before use.
  bool calibrate = true;
  qkd::ChannelTargets targets = qkd::reference_targets();
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::static_power;
  double wavelength_m = 1548.292e-9;     // static, timeseries
  std::vector<double> powers_dbm;        // static, skr-*, spectrum
  attack::SweepSpec sweep;               // sweep
  double power_dbm = 0.0;                // timeseries
  std::vector<attack::Interval> schedule;
  double duration_s = 0.0;
  std::vector<double> distances_km;      // skr-distance
  double center_m = 1548.292e-9;         // spectrum
  double span_m = 0.0;
  double step_m = 0.0;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  std::string file;  // defaults to <name>.csv
};

struct RunConfig {
  std::string name = "run";
  DeviceSpec device;
  PrConfig pr;
  source::SourceSpectrum source = source::cw_signal_1550_68();
  QkdConfig qkd;
  ScenarioConfig scenario;
  OutputConfig output;

  std::string output_file() const { return output.file.empty() ? name + ".csv" : output.file; }
};

/// Relative paths inside the text (anchors_file) resolve against `base_dir`.
/// Throws ConfigError listing every issue.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                       std::string_view source_name = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();
/// TOML text of a built-in preset; throws ConfigError for an unknown name.
std::string_view preset_text(std::string_view name);
RunConfig preset_config(std::string_view name);

/// Inclusive arithmetic grid start, start + step, ..., stop.
std::vector<double> inclusive_range(double start, double stop, double step);

}  // namespace fuse::cli
