#pragma once

#include "ratio/ratio.hpp"
#include "ratio_cli/report.hpp"
#include "ratio_cli/source_map.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ratio::cli {

/// A dataset entry of the config. `seed` overrides the seed derived from the
/// root seed.
struct DatasetEntry {
  std::string name;
  DatasetKind kind;
  std::optional<std::uint64_t> seed;
};

struct DataConfig {
  DatasetEntry in;
  SplitSpec split;
  std::optional<DatasetEntry> train_ood;
  std::vector<DatasetEntry> eval_ood;
};

struct CalibrationConfig {
  std::size_t bins = BinningConfig::kValidationBins;
  TemperatureGrid grid;
};

struct EvalSection {
  std::vector<ThreatModel> robust;
  PgdConfig attack{.steps = 100, .step_size = 0.1, .momentum = 0.9, .restarts = 5};
  WorstCaseConfig worst_case;
  std::size_t ood_sample_size = 256;
  std::size_t ece_bins = BinningConfig::kTestBins;
  /// l2 radii of the confidence-radius profiles; empty disables them.
  std::vector<double> profile_radii;
};

struct CounterfactualEntry {
  std::size_t index = 0; // into the test split
  std::optional<std::size_t> target;
};

struct CounterfactualSection {
  std::vector<double> budgets{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  PgdConfig attack{.steps = 500, .step_size = 0.1, .momentum = 0.9, .restarts = 1};
  std::vector<CounterfactualEntry> requests;
  /// Also run feature generation on the first n points of every eval OOD set.
  std::size_t ood_points = 0;
  /// Image layout for PPM grids; without it trajectories are written as CSV.
  std::optional<ImageGeometry> image;
};

struct ExperimentConfig {
  std::string name = "model";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs/model";
  DataConfig data;
  TrainConfig train;
  CalibrationConfig calibration;
  EvalSection evaluation;
  CounterfactualSection counterfactual;
};

/// Parsed document together with its origin, for diagnostics.
struct ConfigSource {
  std::string file;
  std::string text;
  nlohmann::json doc;
  SourceMap map;
};

/// Reads and parses a JSON file. Syntax errors become ConfigError with the
/// line and column.
ConfigSource read_config_source(const std::filesystem::path &path);

/// Builds the typed config; every error is a ConfigError of the form
/// "<file>:<line>: <key.path>: <message>". Relative paths are resolved
/// against `base_dir`.
ExperimentConfig parse_experiment(const ConfigSource &src, const std::filesystem::path &base_dir);

/// Normalized form with every default spelled out; parse_experiment of this
/// document yields the same config.
nlohmann::json to_json(const ExperimentConfig &cfg);

/// FNV-1a 64 of the normalized config without out_dir, as 16 hex digits.
/// Stable under key reordering since object keys are serialized sorted.
std::string config_hash(const ExperimentConfig &cfg);

/// Input of `ratio report`: {"manifests": [paths], "thresholds": {...},
/// "out_dir": path}. Manifest paths must exist.
struct ReportConfig {
  std::vector<std::filesystem::path> manifests;
  Thresholds thresholds;
  std::filesystem::path out_dir;
};

ReportConfig parse_report_config(const ConfigSource &src, const std::filesystem::path &base_dir);

nlohmann::json to_json(const PgdConfig &c);
nlohmann::json to_json(const DatasetEntry &d);

/// Seed of a dataset entry: its override, else derive_seed(root, {tags}).
std::uint64_t dataset_seed(const DatasetEntry &d, std::uint64_t root, std::uint64_t slot);

/// Stage seeds split from the root seed.
enum class Stage : std::uint64_t { Data = 1, Train = 2, Evaluate = 3, Counterfactual = 4 };
std::uint64_t stage_seed(std::uint64_t root, Stage stage);

} // namespace ratio::cli
