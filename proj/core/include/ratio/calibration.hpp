#pragma once

#include "ratio/probability.hpp"
#include "ratio/tensor.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace ratio {

/// M equal-width bins over [1/K, 1]. Bins are [lo, hi) except the last,
/// which is closed on both ends.
struct BinningConfig {
  std::size_t bins = 15;
  std::size_t num_classes = 2;

  static constexpr std::size_t kValidationBins = 10;
  static constexpr std::size_t kTestBins = 15;

  void validate() const;
  double lower() const { return 1.0 / static_cast<double>(num_classes); }
  double width() const { return (1.0 - lower()) / static_cast<double>(bins); }
  std::size_t bin_of(double confidence) const;
};

struct BinStat {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double acc = 0.0;  // 0 for empty bins
  double conf = 0.0; // 0 for empty bins
};

struct EceBreakdown {
  double ece = 0.0;
  std::vector<BinStat> bins;
};

/// sum_m |B_m|/n |acc(B_m) - conf(B_m)|. Confidences must lie in [1/K, 1].
double ece(std::span<const double> confidences, const std::vector<bool> &correct,
           const BinningConfig &binning);
EceBreakdown ece_breakdown(std::span<const double> confidences, const std::vector<bool> &correct,
                           const BinningConfig &binning);

/// Geometric grid, 500 points on [0.05, 2.71] by default; endpoints exact.
struct TemperatureGrid {
  std::size_t count = 500;
  double lo = 0.05;
  double hi = 2.71;

  std::vector<double> values() const;
};

struct TemperatureFit {
  double temperature = 1.0;
  double ece_before = 0.0; // at T = 1
  double ece_after = 0.0;  // at the fitted T
  EceBreakdown bins_after;
};

/// Max-softmax confidences and correctness of rows of `logits` at T.
void confidences_at(const Matrix &logits, std::span<const std::size_t> labels, double temperature,
                    std::vector<double> &conf, std::vector<bool> &correct);

/// Grid temperature minimizing ECE; exact ties go to the T closest to 1.
TemperatureFit fit_temperature(const Matrix &logits, std::span<const std::size_t> labels,
                               const BinningConfig &binning, const TemperatureGrid &grid = {});

/// softmax(row / T) for every row.
std::vector<ProbabilityVector> apply_temperature(const Matrix &logits, double temperature);

/// {temperature, ece_before, ece_after, bins: [{lo, hi, count, acc, conf}]}
nlohmann::json calibration_report(const TemperatureFit &fit);

} // namespace ratio
