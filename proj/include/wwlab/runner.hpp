#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace wwlab {

inline constexpr const char* kVersion = "0.1.0";

/// Parsed experiment document. params carries the experiment-specific block
/// exactly as given; defaults are applied at run time and documented in the
/// README.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output_path;  // CSV filename, resolved against the output directory
  nlohmann::json params = nlohmann::json::object();
};

/// Validates the top-level document: experiment discriminator, optional
/// seed / output_path / params. Any unknown key raises std::invalid_argument
/// with a message containing "unknown key: <key>".
ExperimentConfig parse_config(const nlohmann::json& document);

/// Reads and parses a config file (UTF-8 JSON).
ExperimentConfig load_config_file(const std::filesystem::path& path);

struct RunResult {
  std::filesystem::path csv_path;
  std::filesystem::path manifest_path;
};

/// Runs the experiment and writes the CSV plus a JSON manifest (config echo,
/// version, wall time) into out_dir. threads parallelizes Monte Carlo
/// ensembles only; the CSV bytes never depend on it.
RunResult run_config(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                     int threads = 1);

}  // namespace wwlab
