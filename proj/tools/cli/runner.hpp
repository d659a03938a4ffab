#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace fuse::cli {

/// Bumped whenever a column is added, removed or reinterpreted.
inline constexpr int kCsvSchemaVersion = 1;

struct Table {
  std::string schema;  // attack, skr, timeseries or spectrum
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;  // diagnostics for stderr, not written to the CSV
};

/// Device, PR model and solver settings described by the config.
Physics build_physics(const RunConfig& config);

/// Channel after optional calibration against the configured targets.
qkd::ChannelModel build_channel(const RunConfig& config);

Table simulate(const RunConfig& config);

/// `# schema: <name> v<version>` line, header row, then one row per point in
/// %.16e notation.
std::string render_csv(const Table& table);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace fuse::cli
