#include "ratio_cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace ratio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string safe_name(const std::string &name) {
  std::string s = name;
  for (char &c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

PointSet first_n(const PointSet &set, std::size_t n) {
  if (n == 0 || n >= set.size()) return set;
  PointSet out = set;
  out.points.resize(n);
  if (out.labeled()) out.labels.resize(n);
  return out;
}

int guarded(std::ostream &log, const char *stage, const std::function<void()> &body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError &e) {
    log << "ratio " << stage << ": error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    log << "ratio " << stage << ": error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

/// Manifest of a trained run whose config matches `ex`.
RunManifest trained_manifest(const Experiment &ex) {
  const fs::path path = ex.run_dir / kManifestFile;
  if (!fs::is_regular_file(path))
    throw ConfigError(path.string() + ": no run manifest; run `ratio train` for this config first");
  RunManifest m = load_manifest(path);
  const std::string hash = config_hash(ex.cfg);
  if (m.config_hash != hash)
    throw ConfigError(path.string() + ": config hash " + hash + " does not match the trained run (" +
                      m.config_hash + ")");
  return m;
}

Classifier trained_model(const Experiment &ex, const RunManifest &m) {
  const auto it = m.artifacts.find("checkpoint");
  const fs::path ckpt = ex.run_dir / (it == m.artifacts.end() ? files::kCheckpoint : it->second);
  if (!fs::is_regular_file(ckpt))
    throw ConfigError(ckpt.string() + ": checkpoint not found; run `ratio train` first");
  Classifier model = load_checkpoint(ckpt);
  if (model.architecture().descriptor() != Architecture::parse(ex.cfg.train.architecture).descriptor())
    throw ConfigError(ckpt.string() + ": checkpoint architecture differs from train.architecture");
  return model;
}

} // namespace

Experiment load_experiment(const Invocation &inv) {
  const ConfigSource src = read_config_source(inv.config);
  Experiment ex;
  if (is_manifest(src.doc)) {
    const RunManifest m = manifest_from_json(src.doc, src.file);
    ConfigSource embedded;
    embedded.file = src.file + "#config";
    embedded.doc = m.config;
    embedded.text = m.config.dump(2);
    embedded.map = SourceMap(embedded.text);
    const fs::path dir = inv.config.parent_path();
    ex.cfg = parse_experiment(embedded, dir);
    ex.run_dir = dir.empty() ? fs::path(".") : dir;
  } else {
    ex.cfg = parse_experiment(src, inv.config.parent_path());
    ex.run_dir = ex.cfg.out_dir;
  }
  if (inv.seed) ex.cfg.seed = *inv.seed;
  if (inv.out) ex.run_dir = *inv.out;
  ex.cfg.out_dir = ex.run_dir;
  return ex;
}

Datasets materialize(const ExperimentConfig &cfg) {
  const Architecture arch = Architecture::parse(cfg.train.architecture);
  const auto load = [&](const DatasetEntry &d, std::uint64_t slot, const std::string &key) {
    PointSet s = generate({d.kind, dataset_seed(d, cfg.seed, slot)});
    if (s.dim != arch.input_dim())
      throw ConfigError(key + ": dataset dimension " + std::to_string(s.dim) +
                        " does not match the architecture input " + std::to_string(arch.input_dim()));
    return s;
  };

  Datasets d;
  const PointSet in = load(cfg.data.in, 0, "data.in");
  if (!in.labeled()) throw ConfigError("data.in: the in-distribution dataset must be labeled");
  for (std::size_t y : in.labels)
    if (y >= arch.num_classes())
      throw ConfigError("data.in: label " + std::to_string(y) + " exceeds the architecture's " +
                        std::to_string(arch.num_classes()) + " classes");
  SplitSpec split = cfg.data.split;
  split.seed = derive_seed(stage_seed(cfg.seed, Stage::Data), {1});
  d.in = ratio::split(in, split);
  if (cfg.data.train_ood) d.train_ood = load(*cfg.data.train_ood, 2, "data.train_ood").unlabeled();
  for (std::size_t i = 0; i < cfg.data.eval_ood.size(); ++i) {
    const DatasetEntry &e = cfg.data.eval_ood[i];
    d.eval_ood.push_back({e.name, load(e, 100 + i, "data.eval_ood." + e.name).unlabeled()});
  }
  return d;
}

int cmd_train(const Invocation &inv, std::ostream &log) {
  return guarded(log, "train", [&] {
    const Experiment ex = load_experiment(inv);
    const Datasets data = materialize(ex.cfg);
    TrainConfig tc = ex.cfg.train;
    tc.seed = stage_seed(ex.cfg.seed, Stage::Train);
    const TrainState state =
        train(tc, {&data.in.train, data.train_ood ? &*data.train_ood : nullptr, &data.in.val});

    fs::create_directories(ex.run_dir);
    save_checkpoint(ex.run_dir / files::kCheckpoint, state.best_model);
    write_text(ex.run_dir / files::kHistory, history_csv(state.history));

    RunManifest m;
    m.config_hash = config_hash(ex.cfg);
    m.seed = ex.cfg.seed;
    ExperimentConfig stored = ex.cfg;
    stored.out_dir = fs::absolute(ex.run_dir).lexically_normal();
    m.config = to_json(stored);
    m.artifacts["checkpoint"] = files::kCheckpoint;
    m.artifacts["history"] = files::kHistory;
    m.timestamps["train"] = utc_timestamp();
    save_manifest(ex.run_dir / kManifestFile, m);

    log << "train: " << ex.cfg.name << " (" << to_string(tc.objective.kind) << "), " << state.epoch
        << " epochs";
    if (state.best_epoch) log << ", best epoch " << *state.best_epoch << " metric " << state.best_metric;
    log << " -> " << (ex.run_dir / files::kCheckpoint).string() << '\n';
  });
}

int cmd_calibrate(const Invocation &inv, std::ostream &log) {
  return guarded(log, "calibrate", [&] {
    const Experiment ex = load_experiment(inv);
    RunManifest m = trained_manifest(ex);
    const Classifier model = trained_model(ex, m);
    const Datasets data = materialize(ex.cfg);
    if (data.in.val.empty()) throw ConfigError("data.split: the validation split is empty");
    const TemperatureFit fit =
        fit_temperature(model.forward_logits(data.in.val.points), data.in.val.labels,
                        {ex.cfg.calibration.bins, model.num_classes()}, ex.cfg.calibration.grid);
    write_text(ex.run_dir / files::kCalibration, calibration_report(fit).dump(2) + "\n");
    m.temperature = fit.temperature;
    m.artifacts["calibration"] = files::kCalibration;
    m.timestamps["calibrate"] = utc_timestamp();
    save_manifest(ex.run_dir / kManifestFile, m);
    log << "calibrate: T = " << fit.temperature << ", ECE " << fit.ece_before << " -> " << fit.ece_after
        << '\n';
  });
}

int cmd_evaluate(const Invocation &inv, std::ostream &log) {
  return guarded(log, "evaluate", [&] {
    const Experiment ex = load_experiment(inv);
    RunManifest m = trained_manifest(ex);
    const Classifier model = trained_model(ex, m);
    const Datasets data = materialize(ex.cfg);
    if (data.in.test.empty()) throw ConfigError("data.split: the test split is empty");

    const std::uint64_t seed = stage_seed(ex.cfg.seed, Stage::Evaluate);
    EvaluationConfig ec;
    ec.robust_threats = ex.cfg.evaluation.robust;
    ec.robust_attack = ex.cfg.evaluation.attack;
    ec.robust_attack.seed = derive_seed(seed, {1});
    ec.worst_case = ex.cfg.evaluation.worst_case;
    ec.worst_case.attack.seed = derive_seed(seed, {2});
    ec.ood_sample_size = ex.cfg.evaluation.ood_sample_size;
    ec.ece_bins = ex.cfg.evaluation.ece_bins;
    if (m.temperature) {
      ec.temperature = *m.temperature;
    } else {
      log << "evaluate: warning: no calibrated temperature in the manifest; using T = 1\n";
    }
    const MetricReport report = evaluate(model, data.in.test, data.eval_ood, ec, ex.cfg.name);
    write_text(ex.run_dir / files::kMetrics, to_json(report).dump(2) + "\n");
    m.artifacts["metrics"] = files::kMetrics;

    const std::vector<double> &radii = ex.cfg.evaluation.profile_radii;
    if (!radii.empty()) {
      PgdConfig pc = ec.robust_attack;
      pc.seed = derive_seed(seed, {3});
      write_text(ex.run_dir / files::kProfileIn,
                 profile_csv(confidence_radius_profile(model, data.in.test, radii, ProfileMode::TrueLabel, pc)));
      m.artifacts["profile_in"] = files::kProfileIn;
      for (const NamedSet &s : data.eval_ood) {
        const std::string file = "profile_ood_" + safe_name(s.name) + ".csv";
        write_text(ex.run_dir / file,
                   profile_csv(confidence_radius_profile(model, first_n(s.points, ec.ood_sample_size), radii,
                                                         ProfileMode::MaxConfidence, pc)));
        m.artifacts["profile_ood_" + s.name] = file;
      }
    }
    m.timestamps["evaluate"] = utc_timestamp();
    save_manifest(ex.run_dir / kManifestFile, m);

    log << "evaluate: " << ex.cfg.name << " acc " << report.clean_acc;
    for (const RobustEntry &r : report.robust_acc)
      log << ", robust(" << to_string(r.threat.norm) << " " << r.threat.epsilon << ") " << r.value;
    if (!report.ood.empty())
      log << ", auc " << report.mean_auc << ", wc_auc " << report.mean_wc_auc << ", mmc " << report.mean_mmc;
    log << '\n';
  });
}

int cmd_counterfactual(const Invocation &inv, std::ostream &log) {
  return guarded(log, "counterfactual", [&] {
    const Experiment ex = load_experiment(inv);
    RunManifest m = trained_manifest(ex);
    const Classifier model = trained_model(ex, m);
    const Datasets data = materialize(ex.cfg);
    const CounterfactualSection &cs = ex.cfg.counterfactual;
    const std::uint64_t seed = stage_seed(ex.cfg.seed, Stage::Counterfactual);

    std::vector<CounterfactualResult> in_results, ood_results;
    for (std::size_t i = 0; i < cs.requests.size(); ++i) {
      const CounterfactualEntry &e = cs.requests[i];
      if (e.index >= data.in.test.size())
        throw ConfigError("counterfactual.requests." + std::to_string(i) + ".index: " +
                          std::to_string(e.index) + " is outside the test split of size " +
                          std::to_string(data.in.test.size()));
      CounterfactualRequest req;
      req.x = data.in.test.points[e.index];
      req.target = e.target;
      req.budgets = cs.budgets;
      req.attack = cs.attack;
      req.attack.seed = derive_seed(seed, {1, i});
      in_results.push_back(generate(req, model));
    }
    for (std::size_t s = 0; s < data.eval_ood.size() && cs.ood_points > 0; ++s) {
      const PointSet pts = first_n(data.eval_ood[s].points, cs.ood_points);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        PgdConfig pc = cs.attack;
        pc.seed = derive_seed(seed, {2, s, i});
        ood_results.push_back(feature_generation_ood(pts.points[i], model, cs.budgets, pc));
      }
    }

    const auto emit = [&](const std::vector<CounterfactualResult> &rs, const std::string &stem,
                          const std::string &key) {
      if (rs.empty()) return;
      if (cs.image) {
        const fs::path ppm = ex.run_dir / (stem + ".ppm");
        const fs::path csv = emit_grid(rs, *cs.image, ppm);
        m.artifacts[key + "_grid"] = ppm.filename().string();
        m.artifacts[key] = csv.filename().string();
      } else {
        write_text(ex.run_dir / (stem + ".csv"), trajectory_csv(rs));
        m.artifacts[key] = stem + ".csv";
      }
    };
    emit(in_results, files::kCounterfactuals, "counterfactuals");
    emit(ood_results, std::string(files::kCounterfactuals) + "_ood", "counterfactuals_ood");
    m.timestamps["counterfactual"] = utc_timestamp();
    save_manifest(ex.run_dir / kManifestFile, m);
    log << "counterfactual: " << in_results.size() << " requests, " << ood_results.size()
        << " OOD feature generations, " << cs.budgets.size() << " budgets\n";
  });
}

std::vector<ReportRow> load_report_rows(const std::vector<fs::path> &manifests) {
  std::vector<ReportRow> rows;
  for (const fs::path &path : manifests) {
    const RunManifest m = load_manifest(path);
    const auto it = m.artifacts.find("metrics");
    if (it == m.artifacts.end())
      throw ConfigError(path.string() + ": no metrics artifact; run `ratio evaluate` first");
    const fs::path metrics = path.parent_path() / it->second;
    std::ifstream in(metrics, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open metrics " + metrics.string());
    ReportRow row;
    try {
      row.metrics = metric_report_from_json(json::parse(in));
      row.model = m.config.at("name").get<std::string>();
      row.kind = parse_objective_kind(m.config.at("train").at("objective").at("kind").get<std::string>());
    } catch (const std::exception &e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_report(const Invocation &inv, std::ostream &out, std::ostream &log) {
  return guarded(log, "report", [&] {
    const ConfigSource src = read_config_source(inv.config);
    const ReportConfig rc = parse_report_config(src, inv.config.parent_path());
    const fs::path out_dir = inv.out ? *inv.out : rc.out_dir;
    const ReportTable table = build_table(load_report_rows(rc.manifests), rc.thresholds);
    fs::create_directories(out_dir);
    const std::string text = render_text(table);
    write_text(out_dir / files::kReportText, text);
    write_text(out_dir / files::kReportCsv, render_csv(table));
    out << text;
  });
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Adversarial training lab: train, calibrate, evaluate and explain small classifiers", "ratio"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Invocation inv;
  std::uint64_t seed = 0;
  std::string config, outdir;
  const std::vector<std::pair<const char *, const char *>> commands{
      {"train", "Train a model and write its checkpoint, history and manifest"},
      {"calibrate", "Fit a temperature on the validation split"},
      {"evaluate", "Compute accuracy, robust accuracy, ECE, AUC, worst-case AUC and MMC"},
      {"counterfactual", "Generate visual counterfactuals over a budget grid"},
      {"report", "Assemble a comparison table from run manifests"}};
  std::vector<CLI::App *> subs;
  std::vector<CLI::Option *> seed_opts, out_opts;
  for (const auto &[name, help] : commands) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Experiment config, run manifest or report config")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "Root seed (overrides the config)"));
    out_opts.push_back(sub->add_option("--out", outdir, "Output directory (overrides the config)"));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    inv.config = config;
    if (seed_opts[i]->count() > 0) inv.seed = seed;
    if (out_opts[i]->count() > 0) inv.out = fs::path(outdir);
    switch (i) {
    case 0: return cmd_train(inv, err);
    case 1: return cmd_calibrate(inv, err);
    case 2: return cmd_evaluate(inv, err);
    case 3: return cmd_counterfactual(inv, err);
    default: return cmd_report(inv, out, err);
    }
  }
  return kExitConfig;
}

} // namespace ratio::cli
