#include "ratio/evaluation.hpp"

#include "ratio/error.hpp"
#include "ratio/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ratio {

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double max_confidence(const Classifier &model, std::span<const double> z, double temperature) {
  return softmax(model.logits(z), temperature).max();
}

PointSet capped(const PointSet &set, std::size_t cap) {
  if (cap == 0 || set.size() <= cap) return set;
  std::vector<std::size_t> idx(cap);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return set.subset(idx);
}

void require_labels(const PointSet &set, const char *what) {
  if (!set.labeled()) throw InvalidArgument(std::string(what) + ": labeled set required");
}

/// z_best of the worst-case confidence attack for every OOD point.
std::vector<DenseVector> worst_case_points(const Classifier &model, const PointSet &ood,
                                           const WorstCaseConfig &cfg) {
  std::vector<DenseVector> out;
  out.reserve(ood.size());
  for (std::size_t i = 0; i < ood.size(); ++i) {
    PgdConfig run = cfg.attack;
    run.seed = derive_seed(cfg.attack.seed, {i});
    const ConfidenceTarget target =
        cfg.exhaustive ? ConfidenceTarget::any_class() : ConfidenceTarget::predicted();
    out.push_back(maximize_confidence(model, ood.points[i], cfg.threat, target, run).z_best);
  }
  return out;
}

std::vector<double> scores_at(const Classifier &model, const PointSet &clean,
                              const std::vector<DenseVector> &attacked, double temperature) {
  std::vector<double> s(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i)
    s[i] = std::max(max_confidence(model, clean.points[i].span(), temperature),
                    max_confidence(model, attacked[i].span(), temperature));
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

} // namespace

double auc(const ScoreSet &scores) {
  const std::size_t n_in = scores.in_scores.size(), n_out = scores.out_scores.size();
  if (n_in == 0 || n_out == 0) throw InvalidArgument("auc: both score sets must be non-empty");
  std::vector<double> out = scores.out_scores;
  std::sort(out.begin(), out.end());
  // twice the pairwise credit, kept integral so the result is exact
  std::uint64_t credit2 = 0;
  for (double s : scores.in_scores) {
    const auto lo = std::lower_bound(out.begin(), out.end(), s);
    const auto hi = std::upper_bound(lo, out.end(), s);
    credit2 += 2 * static_cast<std::uint64_t>(lo - out.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(credit2) / (2.0 * static_cast<double>(n_in) * static_cast<double>(n_out));
}

std::vector<double> max_confidences(const Classifier &model, const PointSet &set,
                                    double temperature) {
  std::vector<double> s;
  s.reserve(set.size());
  for (const DenseVector &x : set.points) s.push_back(max_confidence(model, x.span(), temperature));
  return s;
}

double clean_accuracy(const Classifier &model, const PointSet &set) {
  require_labels(set, "clean_accuracy");
  if (set.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < set.size(); ++i) ok += model.predict(set.points[i].span()) == set.labels[i];
  return static_cast<double>(ok) / static_cast<double>(set.size());
}

double robust_accuracy(const Classifier &model, const PointSet &set, const ThreatModel &tm,
                       const PgdConfig &cfg) {
  const double radius = tm.epsilon;
  return robust_accuracy_sweep(model, set, tm.norm, std::span<const double>(&radius, 1), cfg).front();
}

std::vector<double> robust_accuracy_sweep(const Classifier &model, const PointSet &set, Norm norm,
                                          std::span<const double> radii, const PgdConfig &cfg) {
  require_labels(set, "robust_accuracy");
  cfg.validate();
  std::vector<std::size_t> robust(radii.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const DenseVector &x = set.points[i];
    const std::size_t y = set.labels[i];
    if (model.predict(x.span()) != y) continue;
    PgdConfig run = cfg;
    run.seed = derive_seed(cfg.seed, {i});
    DenseVector prev = x;
    bool fooled = false;
    for (std::size_t r = 0; r < radii.size(); ++r) {
      if (!fooled) {
        const AttackResult res =
            pgd_restarts(model, x, ThreatModel(norm, radii[r]), CwLogit{y}, run, prev.span());
        fooled = res.loss_best > 0.0;
        prev = res.z_best;
      }
      if (!fooled) ++robust[r];
    }
  }
  std::vector<double> acc(radii.size(), 0.0);
  if (set.empty()) return acc;
  for (std::size_t r = 0; r < radii.size(); ++r)
    acc[r] = static_cast<double>(robust[r]) / static_cast<double>(set.size());
  return acc;
}

std::vector<double> worst_case_confidences(const Classifier &model, const PointSet &ood,
                                           const WorstCaseConfig &cfg) {
  return scores_at(model, ood, worst_case_points(model, ood, cfg), cfg.temperature);
}

double worst_case_auc(const Classifier &model, const PointSet &in_set, const PointSet &ood,
                      const WorstCaseConfig &cfg) {
  return auc({max_confidences(model, in_set, cfg.temperature), worst_case_confidences(model, ood, cfg)});
}

double mmc(const Classifier &model, const PointSet &set, const std::optional<WorstCaseConfig> &attack,
           double temperature) {
  if (set.empty()) throw InvalidArgument("mmc: empty set");
  if (!attack) return mean_of(max_confidences(model, set, temperature));
  WorstCaseConfig cfg = *attack;
  cfg.temperature = temperature;
  return mean_of(worst_case_confidences(model, set, cfg));
}

std::vector<ProfileRow> confidence_radius_profile(const Classifier &model, const PointSet &set,
                                                  std::span<const double> radii, ProfileMode mode,
                                                  const PgdConfig &cfg) {
  if (mode == ProfileMode::TrueLabel) require_labels(set, "confidence_radius_profile");
  for (std::size_t r = 1; r < radii.size(); ++r)
    if (!(radii[r] > radii[r - 1])) throw InvalidArgument("profile: radii must be increasing");

  std::vector<double> sums(radii.size(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const DenseVector &x = set.points[i];
    PgdConfig run = cfg;
    run.seed = derive_seed(cfg.seed, {i});
    const std::size_t target =
        mode == ProfileMode::TrueLabel ? set.labels[i] : model.predict(x.span());
    const auto stat = [&](const DenseVector &z) {
      const ProbabilityVector p = softmax(model.logits(z.span()));
      return mode == ProfileMode::TrueLabel ? p[target] : p.max();
    };

    DenseVector prev = x;
    double prev_stat = stat(x);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      const ThreatModel tm = ThreatModel::l2(radii[r]);
      const AttackResult res =
          mode == ProfileMode::TrueLabel
              ? pgd_restarts(model, x, tm, CwLogit{target}, run, prev.span())
              : maximize_confidence(model, x, tm, ConfidenceTarget::of(target), run, prev.span());
      const double s = stat(res.z_best);
      // the previous solution stays feasible in the larger ball
      const bool better = mode == ProfileMode::TrueLabel ? s <= prev_stat : s >= prev_stat;
      if (better) {
        prev = res.z_best;
        prev_stat = s;
      }
      sums[r] += prev_stat;
    }
  }
  std::vector<ProfileRow> rows;
  for (std::size_t r = 0; r < radii.size(); ++r)
    rows.push_back({radii[r], set.empty() ? 0.0 : sums[r] / static_cast<double>(set.size())});
  return rows;
}

std::string profile_csv(const std::vector<ProfileRow> &rows) {
  std::ostringstream out;
  out << "radius,mean_confidence\n";
  for (const ProfileRow &r : rows) out << fmt(r.radius) << ',' << fmt(r.mean_confidence) << '\n';
  return out.str();
}

void MetricReport::validate() const {
  const auto rate = [](double v, const std::string &what) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("metric report: " + what + " outside [0,1]");
  };
  rate(clean_acc, "accuracy");
  rate(ece, "ece");
  for (const RobustEntry &r : robust_acc) rate(r.value, "robust accuracy");
  for (const OodMetrics &o : ood) {
    for (double v : {o.auc, o.wc_auc, o.mmc, o.wc_mmc, o.auc_raw, o.wc_auc_raw, o.mmc_raw})
      rate(v, "OOD metric of '" + o.name + "'");
    if (o.wc_auc > o.auc || o.wc_auc_raw > o.auc_raw)
      throw InvalidArgument("metric report: worst-case AUC exceeds clean AUC on '" + o.name + "'");
  }
}

nlohmann::json to_json(const MetricReport &r) {
  using nlohmann::json;
  json robust = json::array();
  for (const RobustEntry &e : r.robust_acc)
    robust.push_back({{"norm", std::string(to_string(e.threat.norm))},
                      {"epsilon", e.threat.epsilon},
                      {"value", e.value}});
  json ood = json::array();
  for (const OodMetrics &o : r.ood)
    ood.push_back({{"name", o.name},
                   {"auc", o.auc},
                   {"wc_auc", o.wc_auc},
                   {"mmc", o.mmc},
                   {"wc_mmc", o.wc_mmc},
                   {"auc_uncalibrated", o.auc_raw},
                   {"wc_auc_uncalibrated", o.wc_auc_raw},
                   {"mmc_uncalibrated", o.mmc_raw}});
  return {
      {"schema_version", MetricReport::kSchemaVersion},
      {"model", r.model_name},
      {"accuracy", r.clean_acc},
      {"robust_accuracy", robust},
      {"temperature", r.temperature},
      {"ece", r.ece},
      {"ood", ood},
      {"mean", {{"auc", r.mean_auc}, {"wc_auc", r.mean_wc_auc}, {"mmc", r.mean_mmc}}},
      {"attack",
       {{"robust",
         {{"steps", r.robust_attack.steps},
          {"restarts", r.robust_attack.restarts},
          {"step_size", r.robust_attack.step_size},
          {"momentum", r.robust_attack.momentum}}},
        {"worst_case",
         {{"norm", std::string(to_string(r.worst_case.threat.norm))},
          {"epsilon", r.worst_case.threat.epsilon},
          {"steps", r.worst_case.attack.steps},
          {"restarts", r.worst_case.attack.restarts},
          {"exhaustive", r.worst_case.exhaustive}}},
        {"note", "momentum-PGD with restarts: robust accuracy and worst-case AUC are upper bounds"}}},
  };
}

MetricReport metric_report_from_json(const nlohmann::json &j) {
  if (j.at("schema_version").get<int>() != MetricReport::kSchemaVersion)
    throw InvalidArgument("metric report: unsupported schema_version");
  MetricReport r;
  r.model_name = j.at("model").get<std::string>();
  r.clean_acc = j.at("accuracy").get<double>();
  for (const auto &e : j.at("robust_accuracy"))
    r.robust_acc.push_back({ThreatModel(parse_norm(e.at("norm").get<std::string>()),
                                        e.at("epsilon").get<double>()),
                            e.at("value").get<double>()});
  r.temperature = j.at("temperature").get<double>();
  r.ece = j.at("ece").get<double>();
  for (const auto &o : j.at("ood")) {
    OodMetrics m;
    m.name = o.at("name").get<std::string>();
    m.auc = o.at("auc").get<double>();
    m.wc_auc = o.at("wc_auc").get<double>();
    m.mmc = o.at("mmc").get<double>();
    m.wc_mmc = o.at("wc_mmc").get<double>();
    m.auc_raw = o.at("auc_uncalibrated").get<double>();
    m.wc_auc_raw = o.at("wc_auc_uncalibrated").get<double>();
    m.mmc_raw = o.at("mmc_uncalibrated").get<double>();
    r.ood.push_back(m);
  }
  const auto &mean = j.at("mean");
  r.mean_auc = mean.at("auc").get<double>();
  r.mean_wc_auc = mean.at("wc_auc").get<double>();
  r.mean_mmc = mean.at("mmc").get<double>();
  const auto &ra = j.at("attack").at("robust");
  r.robust_attack.steps = ra.at("steps").get<int>();
  r.robust_attack.restarts = ra.at("restarts").get<int>();
  r.robust_attack.step_size = ra.at("step_size").get<double>();
  r.robust_attack.momentum = ra.at("momentum").get<double>();
  const auto &wc = j.at("attack").at("worst_case");
  r.worst_case.threat = ThreatModel(parse_norm(wc.at("norm").get<std::string>()),
                                    wc.at("epsilon").get<double>());
  r.worst_case.attack.steps = wc.at("steps").get<int>();
  r.worst_case.attack.restarts = wc.at("restarts").get<int>();
  r.worst_case.exhaustive = wc.at("exhaustive").get<bool>();
  r.validate();
  return r;
}

MetricReport evaluate(const Classifier &model, const PointSet &test,
                      const std::vector<NamedSet> &ood_sets, const EvaluationConfig &cfg,
                      const std::string &model_name) {
  require_labels(test, "evaluate");
  if (test.empty()) throw InvalidArgument("evaluate: empty test set");
  MetricReport r;
  r.model_name = model_name;
  r.temperature = cfg.temperature;
  r.robust_attack = cfg.robust_attack;
  r.worst_case = cfg.worst_case;
  r.clean_acc = clean_accuracy(model, test);
  for (const ThreatModel &tm : cfg.robust_threats)
    r.robust_acc.push_back({tm, robust_accuracy(model, test, tm, cfg.robust_attack)});

  {
    std::vector<double> conf;
    std::vector<bool> correct;
    confidences_at(model.forward_logits(test.points), test.labels, cfg.temperature, conf, correct);
    r.ece = ece(conf, correct, {cfg.ece_bins, model.num_classes()});
  }

  const std::vector<double> in_cal = max_confidences(model, test, cfg.temperature);
  const std::vector<double> in_raw = max_confidences(model, test, 1.0);
  for (const NamedSet &set : ood_sets) {
    const PointSet ood = capped(set.points, cfg.ood_sample_size);
    if (ood.empty()) throw InvalidArgument("evaluate: OOD set '" + set.name + "' is empty");
    const std::vector<DenseVector> attacked = worst_case_points(model, ood, cfg.worst_case);

    OodMetrics m;
    m.name = set.name;
    const std::vector<double> clean_cal = max_confidences(model, ood, cfg.temperature);
    const std::vector<double> wc_cal = scores_at(model, ood, attacked, cfg.temperature);
    const std::vector<double> clean_raw = max_confidences(model, ood, 1.0);
    const std::vector<double> wc_raw = scores_at(model, ood, attacked, 1.0);
    m.auc = auc({in_cal, clean_cal});
    m.wc_auc = auc({in_cal, wc_cal});
    m.mmc = mean_of(clean_cal);
    m.wc_mmc = mean_of(wc_cal);
    m.auc_raw = auc({in_raw, clean_raw});
    m.wc_auc_raw = auc({in_raw, wc_raw});
    m.mmc_raw = mean_of(clean_raw);
    r.ood.push_back(m);
  }
  if (!r.ood.empty()) {
    const auto n = static_cast<double>(r.ood.size());
    for (const OodMetrics &m : r.ood) {
      r.mean_auc += m.auc / n;
      r.mean_wc_auc += m.wc_auc / n;
      r.mean_mmc += m.mmc / n;
    }
  }
  r.validate();
  return r;
}

} // namespace ratio
