#pragma once

#include "ratio/attacks.hpp"
#include "ratio/calibration.hpp"
#include "ratio/classifier.hpp"
#include "ratio/data.hpp"
#include "ratio/threat_model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ratio {

/// Max-softmax confidences on in- and out-distribution points.
struct ScoreSet {
  std::vector<double> in_scores;
  std::vector<double> out_scores;
};

/// Mann-Whitney AUC with tie credit 1/2.
double auc(const ScoreSet &scores);

/// max_k softmax(f(x)/T)_k for every point.
std::vector<double> max_confidences(const Classifier &model, const PointSet &set,
                                    double temperature = 1.0);

double clean_accuracy(const Classifier &model, const PointSet &set);

/// Fraction of points classified correctly whose CwLogit attack (pgd with
/// restarts) fails to reach a positive margin. Point i uses the seed
/// derive_seed(cfg.seed, {i}).
double robust_accuracy(const Classifier &model, const PointSet &set, const ThreatModel &tm,
                       const PgdConfig &cfg);

/// Robust accuracy over an increasing radius grid with each attack
/// warm-started from the previous radius; a point fooled at one radius stays
/// fooled at every larger one, so the sequence is non-increasing.
std::vector<double> robust_accuracy_sweep(const Classifier &model, const PointSet &set, Norm norm,
                                          std::span<const double> radii, const PgdConfig &cfg);

struct WorstCaseConfig {
  ThreatModel threat = ThreatModel::l2(1.0);
  PgdConfig attack{.steps = 100, .step_size = 0.1, .momentum = 0.9, .restarts = 5};
  /// Attack every class instead of the one predicted at x.
  bool exhaustive = false;
  double temperature = 1.0;
};

/// Out-distribution confidences after maximize_confidence; never below the
/// clean confidence since x itself is feasible.
std::vector<double> worst_case_confidences(const Classifier &model, const PointSet &ood,
                                           const WorstCaseConfig &cfg);

double worst_case_auc(const Classifier &model, const PointSet &in_set, const PointSet &ood,
                      const WorstCaseConfig &cfg);

/// Mean max-confidence, clean or (when `attack` is set) after the attack.
double mmc(const Classifier &model, const PointSet &set,
           const std::optional<WorstCaseConfig> &attack = std::nullopt, double temperature = 1.0);

enum class ProfileMode { TrueLabel, MaxConfidence };

struct ProfileRow {
  double radius = 0.0;
  double mean_confidence = 0.0;
};

/// Mean confidence per l2 radius, warm-started along the increasing grid.
/// TrueLabel: p_y after the CwLogit attack (non-increasing).
/// MaxConfidence: max_k p_k after maximize_confidence (non-decreasing).
std::vector<ProfileRow> confidence_radius_profile(const Classifier &model, const PointSet &set,
                                                  std::span<const double> radii, ProfileMode mode,
                                                  const PgdConfig &cfg);

std::string profile_csv(const std::vector<ProfileRow> &rows);

struct RobustEntry {
  ThreatModel threat;
  double value = 0.0;
};

struct OodMetrics {
  std::string name;
  double auc = 0.0;
  double wc_auc = 0.0;
  double mmc = 0.0;
  double wc_mmc = 0.0;
  // Same statistics on uncalibrated (T = 1) confidences.
  double auc_raw = 0.0;
  double wc_auc_raw = 0.0;
  double mmc_raw = 0.0;
};

struct MetricReport {
  static constexpr int kSchemaVersion = 1;

  std::string model_name;
  double clean_acc = 0.0;
  std::vector<RobustEntry> robust_acc;
  double temperature = 1.0;
  double ece = 0.0;
  std::vector<OodMetrics> ood;
  double mean_auc = 0.0;
  double mean_wc_auc = 0.0;
  double mean_mmc = 0.0;
  PgdConfig robust_attack{.steps = 100, .step_size = 0.1, .momentum = 0.9, .restarts = 5};
  WorstCaseConfig worst_case;

  /// Rates in [0,1] and wc_auc <= auc per set; throws InvalidArgument.
  void validate() const;
};

nlohmann::json to_json(const MetricReport &report);
MetricReport metric_report_from_json(const nlohmann::json &j);

struct NamedSet {
  std::string name;
  PointSet points;
};

struct EvaluationConfig {
  std::vector<ThreatModel> robust_threats;
  PgdConfig robust_attack{.steps = 100, .step_size = 0.1, .momentum = 0.9, .restarts = 5};
  WorstCaseConfig worst_case;
  /// Cap on OOD points per set (first n after generation); 0 keeps all.
  std::size_t ood_sample_size = 256;
  std::size_t ece_bins = BinningConfig::kTestBins;
  double temperature = 1.0;
};

MetricReport evaluate(const Classifier &model, const PointSet &test,
                      const std::vector<NamedSet> &ood_sets, const EvaluationConfig &cfg,
                      const std::string &model_name = {});

} // namespace ratio
