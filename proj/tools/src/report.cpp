#include "ratio_cli/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ratio::cli {

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string threat_label(const ThreatModel &t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "R.Acc %s %g", std::string(to_string(t.norm)).c_str(), t.epsilon);
  return buf;
}

bool threat_less(const ThreatModel &a, const ThreatModel &b) {
  if (a.norm != b.norm) return a.norm == Norm::L2;
  return a.epsilon < b.epsilon;
}

} // namespace

ReportTable build_table(std::vector<ReportRow> rows, const Thresholds &th) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow &a, const ReportRow &b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.model < b.model;
  });
  std::vector<ThreatModel> threats;
  for (const ReportRow &r : rows)
    for (const RobustEntry &e : r.metrics.robust_acc)
      if (std::none_of(threats.begin(), threats.end(), [&](const ThreatModel &t) {
            return t.norm == e.threat.norm && t.epsilon == e.threat.epsilon;
          }))
        threats.push_back(e.threat);
  std::sort(threats.begin(), threats.end(), threat_less);

  ReportTable t;
  t.header = {"Model", "Acc"};
  for (const ThreatModel &tm : threats) t.header.push_back(threat_label(tm));
  for (const char *h : {"ECE", "AUC", "WC AUC", "MMC"}) t.header.emplace_back(h);

  const auto below = [](const std::optional<double> &min, double v) { return min && v < *min; };
  const auto above = [](const std::optional<double> &max, double v) { return max && v > *max; };
  for (const ReportRow &r : rows) {
    std::vector<std::string> cells{r.model, percent(r.metrics.clean_acc)};
    std::vector<bool> flags{false, below(th.min_acc, r.metrics.clean_acc)};
    for (const ThreatModel &tm : threats) {
      const auto it = std::find_if(r.metrics.robust_acc.begin(), r.metrics.robust_acc.end(),
                                   [&](const RobustEntry &e) {
                                     return e.threat.norm == tm.norm && e.threat.epsilon == tm.epsilon;
                                   });
      if (it == r.metrics.robust_acc.end()) {
        cells.emplace_back("-");
        flags.push_back(false);
      } else {
        cells.push_back(percent(it->value));
        flags.push_back(below(th.min_robust_acc, it->value));
      }
    }
    const bool has_ood = !r.metrics.ood.empty();
    cells.push_back(percent(r.metrics.ece));
    flags.push_back(above(th.max_ece, r.metrics.ece));
    cells.push_back(has_ood ? percent(r.metrics.mean_auc) : "-");
    flags.push_back(has_ood && below(th.min_auc, r.metrics.mean_auc));
    cells.push_back(has_ood ? percent(r.metrics.mean_wc_auc) : "-");
    flags.push_back(has_ood && below(th.min_wc_auc, r.metrics.mean_wc_auc));
    cells.push_back(has_ood ? percent(r.metrics.mean_mmc) : "-");
    flags.push_back(has_ood && above(th.max_mmc, r.metrics.mean_mmc));
    t.cells.push_back(std::move(cells));
    t.flagged.push_back(std::move(flags));
  }
  return t;
}

std::string render_text(const ReportTable &t) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (std::size_t r = 0; r < t.cells.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      width[c] = std::max(width[c], t.cells[r][c].size() + (t.flagged[r][c] ? 1 : 0));

  std::ostringstream out;
  const auto line = [&](const std::vector<std::string> &cells, const std::vector<bool> *flags) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string s = cells[c] + (flags && (*flags)[c] ? "*" : "");
      if (c == 0) {
        s.resize(width[c], ' ');
      } else {
        s.insert(0, width[c] - s.size(), ' ');
        out << "  ";
      }
      out << s;
    }
    out << '\n';
  };
  line(t.header, nullptr);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (std::size_t r = 0; r < t.cells.size(); ++r) line(t.cells[r], &t.flagged[r]);
  return out.str();
}

std::string render_csv(const ReportTable &t) {
  std::ostringstream out;
  for (const std::string &h : t.header) out << h << ',';
  out << "flags\n";
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    std::string flags;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      out << t.cells[r][c] << ',';
      if (t.flagged[r][c]) flags += (flags.empty() ? "" : ";") + t.header[c];
    }
    out << flags << '\n';
  }
  return out.str();
}

} // namespace ratio::cli
