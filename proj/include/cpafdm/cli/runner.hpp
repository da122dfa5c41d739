#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cpafdm/cli/config.hpp"

namespace cpafdm::cli {

inline constexpr const char* kVersion = "1.0.0";

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

/// A named table; written as <name>.csv or <name>.json (array of row
/// objects). Doubles use the shortest round-trip decimal form; NaN is
/// written as `nan` in CSV and null in JSON.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string render_csv(const Table& t);
std::string render_json(const Table& t);

/// Runs the configured experiment and returns its tables. Pure function of
/// the configuration (thread count does not matter).
std::vector<Table> run_tables(const ExperimentConfig& c);

struct RunResult {
  std::vector<std::filesystem::path> files;  // tables, then manifest.json
};

/// Writes every table plus manifest.json (config hash, seed, version, the
/// canonical config and per-file hashes) into `out_dir`. Throws
/// std::filesystem::filesystem_error / std::runtime_error on I/O failure.
RunResult run(const ExperimentConfig& c, const std::filesystem::path& out_dir);

}  // namespace cpafdm::cli
