#pragma once

#include "ratio_cli/config.hpp"
#include "ratio_cli/manifest.hpp"
#include "ratio_cli/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ratio::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct Invocation {
  /// Experiment config, or a run manifest for the stages after train.
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// Config plus the run directory it writes to.
struct Experiment {
  ExperimentConfig cfg;
  std::filesystem::path run_dir;
};

/// Reads a config or manifest and applies --seed/--out.
Experiment load_experiment(const Invocation &inv);

struct Datasets {
  Splits in;
  std::optional<PointSet> train_ood;
  std::vector<NamedSet> eval_ood;
};

/// Generates or loads every dataset of the config; deterministic in cfg.seed.
Datasets materialize(const ExperimentConfig &cfg);

/// File names inside a run directory.
namespace files {
inline constexpr const char *kCheckpoint = "model.ckpt";
inline constexpr const char *kHistory = "history.csv";
inline constexpr const char *kCalibration = "calibration.json";
inline constexpr const char *kMetrics = "metrics.json";
inline constexpr const char *kProfileIn = "profile_in.csv";
inline constexpr const char *kCounterfactuals = "counterfactuals";
inline constexpr const char *kReportText = "report.txt";
inline constexpr const char *kReportCsv = "report.csv";
} // namespace files

// Each stage returns an exit code and writes progress to `log`.
int cmd_train(const Invocation &inv, std::ostream &log);
int cmd_calibrate(const Invocation &inv, std::ostream &log);
int cmd_evaluate(const Invocation &inv, std::ostream &log);
int cmd_counterfactual(const Invocation &inv, std::ostream &log);
/// `inv.config` is a report config: {"manifests": [...], "thresholds": {...}}.
/// The table is also printed to `out`.
int cmd_report(const Invocation &inv, std::ostream &out, std::ostream &log);

/// Report assembly from manifest paths; ConfigError names the bad manifest.
std::vector<ReportRow> load_report_rows(const std::vector<std::filesystem::path> &manifests);

/// Full command line: `ratio <command> --config <path> [--seed N] [--out DIR]`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace ratio::cli
