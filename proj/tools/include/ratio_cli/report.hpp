#pragma once

#include "ratio/evaluation.hpp"
#include "ratio/training.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ratio::cli {

/// Cells outside these bounds are flagged. Rates are fractions in [0,1].
struct Thresholds {
  std::optional<double> min_acc;
  std::optional<double> min_robust_acc;
  std::optional<double> max_ece;
  std::optional<double> min_auc;
  std::optional<double> min_wc_auc;
  std::optional<double> max_mmc;
};

struct ReportRow {
  std::string model;
  Objective::Kind kind = Objective::Kind::Plain;
  MetricReport metrics;
};

/// Model | Acc | R.Acc per threat | ECE | AUC | WC AUC | MMC, values in
/// percent with one decimal. Rows are ordered Plain, OE, AT, ACET, RATIO and
/// then by name; robust columns by norm and radius.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::vector<bool>> flagged;
};

ReportTable build_table(std::vector<ReportRow> rows, const Thresholds &thresholds);

/// Aligned text; flagged cells carry a trailing '*'.
std::string render_text(const ReportTable &t);

/// Plain values plus a trailing `flags` column naming the flagged columns
/// separated by ';'.
std::string render_csv(const ReportTable &t);

} // namespace ratio::cli
