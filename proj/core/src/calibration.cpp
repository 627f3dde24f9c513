#include "ratio/calibration.hpp"

#include "ratio/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace ratio {

namespace {
constexpr double kConfidenceSlack = 1e-12;
}

void BinningConfig::validate() const {
  if (bins < 1) throw InvalidArgument("binning: need at least one bin");
  if (num_classes < 2) throw InvalidArgument("binning: need K >= 2");
}

std::size_t BinningConfig::bin_of(double confidence) const {
  const double t = (confidence - lower()) / width();
  if (t <= 0.0) return 0;
  const auto m = static_cast<std::size_t>(std::floor(t));
  return std::min(m, bins - 1);
}

EceBreakdown ece_breakdown(std::span<const double> confidences, const std::vector<bool> &correct,
                           const BinningConfig &binning) {
  binning.validate();
  if (confidences.empty()) throw InvalidArgument("ece: empty input");
  require_same_dim(confidences.size(), correct.size(), "ece");

  // extended accumulators keep the small golden cases correctly rounded
  std::vector<long double> sum_conf(binning.bins, 0.0L), sum_acc(binning.bins, 0.0L);
  std::vector<std::size_t> count(binning.bins, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= binning.lower() - kConfidenceSlack && c <= 1.0 + kConfidenceSlack))
      throw InvalidArgument("ece: confidence " + std::to_string(c) + " outside [1/K, 1]");
    const std::size_t m = binning.bin_of(c);
    sum_conf[m] += c;
    sum_acc[m] += correct[i] ? 1.0L : 0.0L;
    ++count[m];
  }

  EceBreakdown out;
  const auto n = static_cast<long double>(confidences.size());
  long double total = 0.0L;
  for (std::size_t m = 0; m < binning.bins; ++m) {
    BinStat b;
    b.lo = binning.lower() + static_cast<double>(m) * binning.width();
    b.hi = m + 1 == binning.bins ? 1.0 : binning.lower() + static_cast<double>(m + 1) * binning.width();
    b.count = count[m];
    if (count[m] > 0) {
      const auto k = static_cast<long double>(count[m]);
      b.acc = static_cast<double>(sum_acc[m] / k);
      b.conf = static_cast<double>(sum_conf[m] / k);
      total += std::abs(sum_acc[m] - sum_conf[m]) / n;
    }
    out.bins.push_back(b);
  }
  out.ece = static_cast<double>(total);
  return out;
}

double ece(std::span<const double> confidences, const std::vector<bool> &correct,
           const BinningConfig &binning) {
  return ece_breakdown(confidences, correct, binning).ece;
}

std::vector<double> TemperatureGrid::values() const {
  if (count < 2 || !(lo > 0.0) || !(hi > lo))
    throw InvalidArgument("temperature grid: need count >= 2 and 0 < lo < hi");
  std::vector<double> g(count);
  const double ratio = hi / lo;
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo * std::pow(ratio, static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

void confidences_at(const Matrix &logits, std::span<const std::size_t> labels, double temperature,
                    std::vector<double> &conf, std::vector<bool> &correct) {
  require_same_dim(logits.rows(), labels.size(), "confidences_at");
  conf.resize(logits.rows());
  correct.assign(logits.rows(), false);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const ProbabilityVector p = softmax(logits.row(r), temperature);
    const std::size_t k = p.argmax();
    conf[r] = p[k];
    correct[r] = k == labels[r];
  }
}

TemperatureFit fit_temperature(const Matrix &logits, std::span<const std::size_t> labels,
                               const BinningConfig &binning, const TemperatureGrid &grid) {
  if (logits.rows() == 0) throw InvalidArgument("fit_temperature: empty validation set");
  std::vector<double> conf;
  std::vector<bool> correct;

  TemperatureFit fit;
  confidences_at(logits, labels, 1.0, conf, correct);
  fit.ece_before = ece(conf, correct, binning);

  double best_ece = 0.0, best_t = 0.0;
  bool first = true;
  for (double t : grid.values()) {
    confidences_at(logits, labels, t, conf, correct);
    const double e = ece(conf, correct, binning);
    if (first || e < best_ece || (e == best_ece && std::abs(t - 1.0) < std::abs(best_t - 1.0))) {
      best_ece = e;
      best_t = t;
      first = false;
    }
  }
  fit.temperature = best_t;
  confidences_at(logits, labels, best_t, conf, correct);
  fit.bins_after = ece_breakdown(conf, correct, binning);
  fit.ece_after = fit.bins_after.ece;
  return fit;
}

std::vector<ProbabilityVector> apply_temperature(const Matrix &logits, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("apply_temperature: T must be > 0");
  std::vector<ProbabilityVector> out;
  out.reserve(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) out.push_back(softmax(logits.row(r), temperature));
  return out;
}

nlohmann::json calibration_report(const TemperatureFit &fit) {
  nlohmann::json bins = nlohmann::json::array();
  for (const BinStat &b : fit.bins_after.bins)
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"acc", b.acc}, {"conf", b.conf}});
  return {{"temperature", fit.temperature},
          {"ece_before", fit.ece_before},
          {"ece_after", fit.ece_after},
          {"bins", bins}};
}

} // namespace ratio
