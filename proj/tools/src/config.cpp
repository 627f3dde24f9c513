#include "ratio_cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>

namespace ratio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

/// A value of the document plus enough context to blame it.
class Node {
public:
  Node(const ConfigSource &src, const json &j, std::string ptr)
      : src_(&src), j_(&j), ptr_(std::move(ptr)) {}

  const json &raw() const { return *j_; }
  const std::string &pointer() const { return ptr_; }

  [[noreturn]] void fail(const std::string &msg) const {
    throw ConfigError(src_->file + ":" + std::to_string(src_->map.line_of(ptr_)) + ": " +
                      dotted() + ": " + msg);
  }

  std::string dotted() const {
    if (ptr_.empty()) return "<root>";
    std::string out;
    for (std::size_t i = 1; i < ptr_.size(); ++i) out += ptr_[i] == '/' ? '.' : ptr_[i];
    return out;
  }

  bool has(const std::string &key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string &key) const {
    if (!j_->is_object()) fail("expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) {
      Node missing(*src_, *j_, ptr_ + "/" + key);
      missing.fail("missing required key");
    }
    return {*src_, *it, ptr_ + "/" + key};
  }

  std::vector<Node> items() const {
    if (!j_->is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_->size(); ++i)
      out.emplace_back(*src_, (*j_)[i], ptr_ + "/" + std::to_string(i));
    return out;
  }

  void only(const std::vector<std::string> &keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto &[k, v] : j_->items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        Node(*src_, v, ptr_ + "/" + k).fail("unknown key");
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }
  std::size_t count() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0))
      fail("expected a non-negative integer");
    return j_->get<std::size_t>();
  }
  int integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<int>();
  }
  std::uint64_t u64() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0))
      fail("expected a non-negative integer");
    return j_->get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }
  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const Node &n : items()) out.push_back(n.number());
    return out;
  }

  double number(const std::string &key, double def) const { return has(key) ? at(key).number() : def; }
  std::size_t count(const std::string &key, std::size_t def) const { return has(key) ? at(key).count() : def; }
  int integer(const std::string &key, int def) const { return has(key) ? at(key).integer() : def; }
  bool boolean(const std::string &key, bool def) const { return has(key) ? at(key).boolean() : def; }
  std::string string(const std::string &key, std::string def) const {
    return has(key) ? at(key).string() : def;
  }

  /// Runs `check` and reports InvalidArgument/ConfigError against this node.
  template <class F> void validate(F &&check) const {
    try {
      check();
    } catch (const InvalidArgument &e) {
      fail(e.what());
    } catch (const ConfigError &e) {
      fail(e.what());
    }
  }

private:
  const ConfigSource *src_;
  const json *j_;
  std::string ptr_;
};

PgdConfig parse_pgd(const Node &n, PgdConfig c) {
  n.only({"steps", "step_size", "momentum", "restarts", "random_init"});
  c.steps = n.integer("steps", c.steps);
  c.step_size = n.number("step_size", c.step_size);
  c.momentum = n.number("momentum", c.momentum);
  c.restarts = n.integer("restarts", c.restarts);
  c.random_init = n.boolean("random_init", c.random_init);
  n.validate([&] { c.validate(); });
  return c;
}

PgdConfig pgd_or(const Node &parent, const std::string &key, const PgdConfig &def) {
  return parent.has(key) ? parse_pgd(parent.at(key), def) : def;
}

Shape parse_shape(const Node &n) {
  const std::vector<double> v = n.numbers();
  const auto dim = [&](double x) {
    if (!(x >= 1.0) || x != static_cast<double>(static_cast<std::size_t>(x)))
      n.fail("shape entries must be positive integers");
    return static_cast<std::size_t>(x);
  };
  if (v.size() == 1) return {dim(v[0]), 1, 1};
  if (v.size() == 3) return {dim(v[0]), dim(v[1]), dim(v[2])};
  n.fail("shape must be [d] or [C, H, W]");
}

DatasetEntry parse_dataset(const Node &n, const fs::path &base, bool named) {
  DatasetEntry d;
  const std::string kind = n.at("kind").string();
  const auto common = [&](std::initializer_list<const char *> extra) {
    std::vector<std::string> keys{"kind", "seed"};
    if (named) keys.emplace_back("name");
    keys.insert(keys.end(), extra.begin(), extra.end());
    n.only(keys);
  };
  if (named) d.name = n.at("name").string();
  if (n.has("seed")) d.seed = n.at("seed").u64();

  if (kind == "gaussian_mixture_2d") {
    common({"means", "cov", "n", "canvas"});
    GaussianMixture2D g;
    for (const Node &m : n.at("means").items()) {
      const std::vector<double> xy = m.numbers();
      if (xy.size() != 2) m.fail("each mean must be [x, y]");
      g.means.push_back({xy[0], xy[1]});
    }
    if (n.has("cov")) {
      const std::vector<double> c = n.at("cov").numbers();
      if (c.size() != 3) n.at("cov").fail("cov must be [xx, xy, yy]");
      g.cov = {c[0], c[1], c[2]};
    }
    g.n = n.at("n").count();
    g.canvas = n.number("canvas", g.canvas);
    n.validate([&] { (void)generate({GaussianMixture2D{g.means, g.cov, 1, g.canvas}, 0}); });
    if (g.n == 0) n.at("n").fail("n must be positive");
    d.kind = g;
  } else if (kind == "rings_2d") {
    common({"n", "inner_radius", "outer_radius", "canvas"});
    Rings2D r;
    r.n = n.at("n").count();
    r.inner_radius = n.number("inner_radius", r.inner_radius);
    r.outer_radius = n.number("outer_radius", r.outer_radius);
    r.canvas = n.number("canvas", r.canvas);
    if (r.n == 0) n.at("n").fail("n must be positive");
    n.validate([&] { (void)generate({Rings2D{1, r.inner_radius, r.outer_radius, r.canvas}, 0}); });
    d.kind = r;
  } else if (kind == "raw") {
    common({"path"});
    fs::path p = n.at("path").string();
    if (p.is_relative()) p = base / p;
    p = p.lexically_normal();
    if (!fs::is_directory(p)) n.at("path").fail("dataset directory '" + p.string() + "' does not exist");
    d.kind = RawTensorDir{p};
  } else if (kind == "uniform_noise") {
    common({"shape", "n"});
    UniformNoise u{parse_shape(n.at("shape")), n.at("n").count()};
    if (u.n == 0) n.at("n").fail("n must be positive");
    d.kind = u;
  } else if (kind == "smoothed_noise") {
    common({"shape", "n", "kernel"});
    SmoothedNoise s{parse_shape(n.at("shape")), n.at("n").count(), n.count("kernel", 3)};
    if (s.n == 0) n.at("n").fail("n must be positive");
    if (s.kernel == 0) n.at("kernel").fail("kernel must be positive");
    d.kind = s;
  } else {
    n.at("kind").fail("unknown dataset kind '" + kind +
                      "' (gaussian_mixture_2d, rings_2d, raw, uniform_noise, smoothed_noise)");
  }
  return d;
}

ThreatModel parse_threat(const Node &n) {
  n.only({"norm", "epsilon"});
  Norm norm = Norm::L2;
  if (n.has("norm")) {
    const Node nn = n.at("norm");
    n.validate([&] {
      try {
        norm = parse_norm(nn.string());
      } catch (const InvalidArgument &e) {
        nn.fail(e.what());
      }
    });
  }
  const double eps = n.at("epsilon").number();
  if (!(eps >= 0.0)) n.at("epsilon").fail("epsilon must be >= 0");
  return {norm, eps};
}

Objective parse_objective(const Node &n) {
  n.only({"kind", "eps_in", "eps_out", "lambda", "clean_in_fraction", "ramp_increment", "ramp_cap"});
  Objective o;
  const Node kind = n.at("kind");
  try {
    o.kind = parse_objective_kind(kind.string());
  } catch (const InvalidArgument &e) {
    kind.fail(e.what());
  }
  o.eps_in = n.number("eps_in", 0.0);
  o.eps_out = n.number("eps_out", 0.0);
  o.lambda = n.number("lambda", 1.0);
  o.clean_in_fraction = n.number("clean_in_fraction", 0.0);
  o.ramp_increment = n.integer("ramp_increment", o.ramp_increment);
  o.ramp_cap = n.integer("ramp_cap", o.ramp_cap);
  const auto unused = [&](const char *key, bool used) {
    if (n.has(key) && !used) n.at(key).fail("not used by objective '" + kind.string() + "'");
  };
  unused("eps_in", o.attacks_in());
  unused("eps_out", o.attacks_out());
  unused("lambda", o.uses_out_stream());
  unused("clean_in_fraction", o.attacks_in());
  unused("ramp_increment", o.kind == Objective::Kind::ACET);
  unused("ramp_cap", o.kind == Objective::Kind::ACET);
  n.validate([&] { o.validate(); });
  return o;
}

OptimizerConfig parse_optimizer(const Node &n) {
  n.only({"lr", "momentum", "weight_decay", "lr_decay_factor", "milestones"});
  OptimizerConfig c;
  c.base_lr = n.number("lr", c.base_lr);
  c.momentum = n.number("momentum", c.momentum);
  c.weight_decay = n.number("weight_decay", c.weight_decay);
  c.lr_decay_factor = n.number("lr_decay_factor", c.lr_decay_factor);
  if (n.has("milestones")) c.decay_milestones = n.at("milestones").numbers();
  n.validate([&] { c.validate(); });
  return c;
}

EarlyStopConfig parse_early_stop(const Node &n, const PgdConfig &def_attack) {
  n.only({"metric", "epsilon", "attack"});
  EarlyStopConfig e;
  e.attack = def_attack;
  const std::string metric = n.string("metric", "robust_accuracy");
  if (metric == "robust_accuracy") e.metric = EarlyStopConfig::Metric::RobustAccuracy;
  else if (metric == "clean_accuracy") e.metric = EarlyStopConfig::Metric::CleanAccuracy;
  else if (metric == "last_epoch") e.metric = EarlyStopConfig::Metric::LastEpoch;
  else n.at("metric").fail("expected robust_accuracy, clean_accuracy or last_epoch");
  e.epsilon = n.number("epsilon", 0.0);
  if (!(e.epsilon >= 0.0)) n.at("epsilon").fail("epsilon must be >= 0");
  e.attack = pgd_or(n, "attack", def_attack);
  return e;
}

TrainConfig parse_train(const Node &n) {
  n.only({"architecture", "objective", "in_batch", "out_batch", "epochs", "optimizer", "attack_in",
          "attack_out", "early_stop"});
  TrainConfig t;
  t.architecture = n.at("architecture").string();
  n.at("architecture").validate([&] { (void)Architecture::parse(t.architecture); });
  t.objective = parse_objective(n.at("objective"));
  t.in_batch = n.count("in_batch", t.in_batch);
  t.out_batch = n.count("out_batch", t.out_batch);
  t.epochs = n.count("epochs", t.epochs);
  if (n.has("optimizer")) t.optimizer = parse_optimizer(n.at("optimizer"));
  t.attack_in = pgd_or(n, "attack_in", t.attack_in);
  t.attack_out = pgd_or(n, "attack_out", t.attack_out);
  t.early_stop.attack = t.attack_in;
  if (n.has("early_stop")) t.early_stop = parse_early_stop(n.at("early_stop"), t.attack_in);
  n.validate([&] { t.validate(); });
  return t;
}

CalibrationConfig parse_calibration(const Node &n) {
  n.only({"bins", "grid"});
  CalibrationConfig c;
  c.bins = n.count("bins", c.bins);
  if (c.bins == 0) n.at("bins").fail("bins must be positive");
  if (n.has("grid")) {
    const Node g = n.at("grid");
    g.only({"count", "lo", "hi"});
    c.grid.count = g.count("count", c.grid.count);
    c.grid.lo = g.number("lo", c.grid.lo);
    c.grid.hi = g.number("hi", c.grid.hi);
    g.validate([&] { (void)c.grid.values(); });
  }
  return c;
}

EvalSection parse_evaluation(const Node &n) {
  n.only({"robust", "attack", "worst_case", "ood_sample_size", "ece_bins", "profile_radii"});
  EvalSection e;
  if (n.has("robust"))
    for (const Node &t : n.at("robust").items()) e.robust.push_back(parse_threat(t));
  e.attack = pgd_or(n, "attack", e.attack);
  if (n.has("worst_case")) {
    const Node w = n.at("worst_case");
    w.only({"norm", "epsilon", "attack", "exhaustive"});
    Norm norm = Norm::L2;
    if (w.has("norm")) {
      try {
        norm = parse_norm(w.at("norm").string());
      } catch (const InvalidArgument &err) {
        w.at("norm").fail(err.what());
      }
    }
    const double eps = w.number("epsilon", e.worst_case.threat.epsilon);
    if (!(eps >= 0.0)) w.at("epsilon").fail("epsilon must be >= 0");
    e.worst_case.threat = ThreatModel(norm, eps);
    e.worst_case.attack = pgd_or(w, "attack", e.worst_case.attack);
    e.worst_case.exhaustive = w.boolean("exhaustive", false);
  }
  e.ood_sample_size = n.count("ood_sample_size", e.ood_sample_size);
  e.ece_bins = n.count("ece_bins", e.ece_bins);
  if (e.ece_bins == 0) n.at("ece_bins").fail("ece_bins must be positive");
  if (n.has("profile_radii")) {
    e.profile_radii = n.at("profile_radii").numbers();
    for (std::size_t i = 0; i < e.profile_radii.size(); ++i)
      if (!(e.profile_radii[i] >= 0.0) || (i > 0 && !(e.profile_radii[i] > e.profile_radii[i - 1])))
        n.at("profile_radii").fail("radii must be non-negative and strictly increasing");
  }
  return e;
}

CounterfactualSection parse_counterfactual(const Node &n) {
  n.only({"budgets", "attack", "requests", "ood_points", "image"});
  CounterfactualSection c;
  if (n.has("budgets")) {
    c.budgets = n.at("budgets").numbers();
    for (std::size_t i = 0; i < c.budgets.size(); ++i)
      if (!(c.budgets[i] >= 0.0) || (i > 0 && !(c.budgets[i] > c.budgets[i - 1])))
        n.at("budgets").fail("budgets must be non-negative and strictly increasing");
  }
  c.attack = pgd_or(n, "attack", c.attack);
  if (n.has("requests"))
    for (const Node &r : n.at("requests").items()) {
      r.only({"index", "target"});
      CounterfactualEntry e;
      e.index = r.at("index").count();
      if (r.has("target")) e.target = r.at("target").count();
      c.requests.push_back(e);
    }
  c.ood_points = n.count("ood_points", 0);
  if (n.has("image")) {
    const Node g = n.at("image");
    g.only({"height", "width", "channels"});
    ImageGeometry geom{g.at("height").count(), g.at("width").count(), g.count("channels", 1)};
    if (geom.height == 0 || geom.width == 0 || (geom.channels != 1 && geom.channels != 3))
      g.fail("image must have positive height and width and 1 or 3 channels");
    c.image = geom;
  }
  return c;
}

std::size_t dataset_dim(const DatasetEntry &d) {
  return std::visit(overloaded{[](const GaussianMixture2D &) -> std::size_t { return 2; },
                               [](const Rings2D &) -> std::size_t { return 2; },
                               [](const RawTensorDir &) -> std::size_t { return 0; },
                               [](const UniformNoise &u) { return u.shape.size(); },
                               [](const SmoothedNoise &s) { return s.shape.size(); }},
                    d.kind);
}

json shape_json(const Shape &s) {
  if (s.height == 1 && s.width == 1) return json::array({s.channels});
  return json::array({s.channels, s.height, s.width});
}

} // namespace

ConfigSource read_config_source(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  ConfigSource src;
  src.file = path.string();
  src.text.assign(std::istreambuf_iterator<char>(in), {});
  try {
    src.doc = json::parse(src.text);
  } catch (const json::parse_error &e) {
    const auto [line, col] = line_column(src.text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (const auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(src.file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON: " + what);
  }
  src.map = SourceMap(src.text);
  return src;
}

ExperimentConfig parse_experiment(const ConfigSource &src, const fs::path &base) {
  const Node root(src, src.doc, "");
  root.only({"name", "seed", "out_dir", "data", "train", "calibration", "evaluation", "counterfactual",
             "$schema"});
  ExperimentConfig cfg;
  cfg.name = root.string("name", cfg.name);
  if (root.has("seed")) cfg.seed = root.at("seed").u64();
  if (root.has("out_dir")) {
    fs::path p = root.at("out_dir").string();
    cfg.out_dir = p.is_relative() ? (base / p).lexically_normal() : p;
  } else {
    cfg.out_dir = (base / "runs" / cfg.name).lexically_normal();
  }

  const Node data = root.at("data");
  data.only({"in", "split", "train_ood", "eval_ood"});
  cfg.data.in = parse_dataset(data.at("in"), base, false);
  if (!std::holds_alternative<GaussianMixture2D>(cfg.data.in.kind) &&
      !std::holds_alternative<RawTensorDir>(cfg.data.in.kind))
    data.at("in").at("kind").fail("the in-distribution must be gaussian_mixture_2d or raw (labeled)");
  if (data.has("split")) {
    const Node s = data.at("split");
    s.only({"train", "val", "test"});
    cfg.data.split.train = s.number("train", cfg.data.split.train);
    cfg.data.split.val = s.number("val", cfg.data.split.val);
    cfg.data.split.test = s.number("test", cfg.data.split.test);
    s.validate([&] { cfg.data.split.validate(); });
  }
  if (data.has("train_ood")) cfg.data.train_ood = parse_dataset(data.at("train_ood"), base, false);
  if (data.has("eval_ood")) {
    for (const Node &e : data.at("eval_ood").items()) {
      cfg.data.eval_ood.push_back(parse_dataset(e, base, true));
      for (std::size_t i = 0; i + 1 < cfg.data.eval_ood.size(); ++i)
        if (cfg.data.eval_ood[i].name == cfg.data.eval_ood.back().name)
          e.at("name").fail("duplicate OOD set name '" + cfg.data.eval_ood.back().name + "'");
    }
  }

  const Node train = root.at("train");
  cfg.train = parse_train(train);
  const Architecture arch = Architecture::parse(cfg.train.architecture);
  const auto check_dim = [&](const DatasetEntry &d, const Node &n) {
    const std::size_t dim = dataset_dim(d);
    if (dim != 0 && dim != arch.input_dim())
      n.fail("dimension " + std::to_string(dim) + " does not match the architecture input " +
             std::to_string(arch.input_dim()));
  };
  check_dim(cfg.data.in, data.at("in"));
  if (cfg.data.train_ood) check_dim(*cfg.data.train_ood, data.at("train_ood"));
  for (std::size_t i = 0; i < cfg.data.eval_ood.size(); ++i)
    check_dim(cfg.data.eval_ood[i], data.at("eval_ood").items()[i]);
  if (cfg.train.objective.uses_out_stream() && !cfg.data.train_ood)
    data.fail("objective '" + std::string(to_string(cfg.train.objective.kind)) +
              "' needs data.train_ood");

  if (root.has("calibration")) cfg.calibration = parse_calibration(root.at("calibration"));
  if (root.has("evaluation")) cfg.evaluation = parse_evaluation(root.at("evaluation"));
  if (root.has("counterfactual")) {
    cfg.counterfactual = parse_counterfactual(root.at("counterfactual"));
    const auto &rq = cfg.counterfactual.requests;
    for (std::size_t i = 0; i < rq.size(); ++i)
      if (rq[i].target && *rq[i].target >= arch.num_classes())
        root.at("counterfactual").at("requests").items()[i].at("target").fail("target class out of range");
    if (cfg.counterfactual.image) {
      const ImageGeometry &g = *cfg.counterfactual.image;
      if (g.height * g.width * g.channels != arch.input_dim())
        root.at("counterfactual").at("image").fail("image geometry does not match the input dimension");
    }
  }
  return cfg;
}

ReportConfig parse_report_config(const ConfigSource &src, const fs::path &base) {
  const Node root(src, src.doc, "");
  root.only({"manifests", "thresholds", "out_dir", "$schema"});
  ReportConfig r;
  const std::vector<Node> list = root.at("manifests").items();
  if (list.empty()) root.at("manifests").fail("at least one manifest is required");
  for (const Node &m : list) {
    fs::path p = m.string();
    if (p.is_relative()) p = base / p;
    p = p.lexically_normal();
    if (fs::is_directory(p)) p /= "manifest.json";
    if (!fs::is_regular_file(p)) m.fail("manifest '" + p.string() + "' does not exist");
    r.manifests.push_back(p);
  }
  if (root.has("thresholds")) {
    const Node t = root.at("thresholds");
    t.only({"min_acc", "min_robust_acc", "max_ece", "min_auc", "min_wc_auc", "max_mmc"});
    const auto opt = [&](const char *key, std::optional<double> &slot) {
      if (!t.has(key)) return;
      slot = t.at(key).number();
      if (!(*slot >= 0.0 && *slot <= 1.0)) t.at(key).fail("thresholds are fractions in [0,1]");
    };
    opt("min_acc", r.thresholds.min_acc);
    opt("min_robust_acc", r.thresholds.min_robust_acc);
    opt("max_ece", r.thresholds.max_ece);
    opt("min_auc", r.thresholds.min_auc);
    opt("min_wc_auc", r.thresholds.min_wc_auc);
    opt("max_mmc", r.thresholds.max_mmc);
  }
  if (root.has("out_dir")) {
    fs::path p = root.at("out_dir").string();
    r.out_dir = p.is_relative() ? (base / p).lexically_normal() : p;
  } else {
    r.out_dir = base.empty() ? fs::path(".") : base;
  }
  return r;
}

json to_json(const PgdConfig &c) {
  return {{"steps", c.steps},
          {"step_size", c.step_size},
          {"momentum", c.momentum},
          {"restarts", c.restarts},
          {"random_init", c.random_init}};
}

json to_json(const DatasetEntry &d) {
  json j = std::visit(
      overloaded{[](const GaussianMixture2D &g) {
                   json means = json::array();
                   for (const auto &m : g.means) means.push_back({m[0], m[1]});
                   return json{{"kind", "gaussian_mixture_2d"},
                               {"means", means},
                               {"cov", {g.cov[0], g.cov[1], g.cov[2]}},
                               {"n", g.n},
                               {"canvas", g.canvas}};
                 },
                 [](const Rings2D &r) {
                   return json{{"kind", "rings_2d"},
                               {"n", r.n},
                               {"inner_radius", r.inner_radius},
                               {"outer_radius", r.outer_radius},
                               {"canvas", r.canvas}};
                 },
                 [](const RawTensorDir &r) { return json{{"kind", "raw"}, {"path", r.path.string()}}; },
                 [](const UniformNoise &u) {
                   return json{{"kind", "uniform_noise"}, {"shape", shape_json(u.shape)}, {"n", u.n}};
                 },
                 [](const SmoothedNoise &s) {
                   return json{{"kind", "smoothed_noise"},
                               {"shape", shape_json(s.shape)},
                               {"n", s.n},
                               {"kernel", s.kernel}};
                 }},
      d.kind);
  if (!d.name.empty()) j["name"] = d.name;
  if (d.seed) j["seed"] = *d.seed;
  return j;
}

json to_json(const ExperimentConfig &c) {
  json data{{"in", to_json(c.data.in)},
            {"split", {{"train", c.data.split.train}, {"val", c.data.split.val}, {"test", c.data.split.test}}},
            {"eval_ood", json::array()}};
  if (c.data.train_ood) data["train_ood"] = to_json(*c.data.train_ood);
  for (const DatasetEntry &e : c.data.eval_ood) data["eval_ood"].push_back(to_json(e));

  const Objective &o = c.train.objective;
  json obj{{"kind", std::string(to_string(o.kind))}};
  if (o.attacks_in()) {
    obj["eps_in"] = o.eps_in;
    obj["clean_in_fraction"] = o.clean_in_fraction;
  }
  if (o.attacks_out()) obj["eps_out"] = o.eps_out;
  if (o.uses_out_stream()) obj["lambda"] = o.lambda;
  if (o.kind == Objective::Kind::ACET) {
    obj["ramp_increment"] = o.ramp_increment;
    obj["ramp_cap"] = o.ramp_cap;
  }
  const char *metric = c.train.early_stop.metric == EarlyStopConfig::Metric::RobustAccuracy
                           ? "robust_accuracy"
                           : c.train.early_stop.metric == EarlyStopConfig::Metric::CleanAccuracy
                                 ? "clean_accuracy"
                                 : "last_epoch";
  const OptimizerConfig &opt = c.train.optimizer;
  json train{{"architecture", c.train.architecture},
             {"objective", obj},
             {"in_batch", c.train.in_batch},
             {"out_batch", c.train.out_batch},
             {"epochs", c.train.epochs},
             {"optimizer",
              {{"lr", opt.base_lr},
               {"momentum", opt.momentum},
               {"weight_decay", opt.weight_decay},
               {"lr_decay_factor", opt.lr_decay_factor},
               {"milestones", opt.decay_milestones}}},
             {"attack_in", to_json(c.train.attack_in)},
             {"attack_out", to_json(c.train.attack_out)},
             {"early_stop",
              {{"metric", metric},
               {"epsilon", c.train.early_stop.epsilon},
               {"attack", to_json(c.train.early_stop.attack)}}}};

  json robust = json::array();
  for (const ThreatModel &t : c.evaluation.robust)
    robust.push_back({{"norm", std::string(to_string(t.norm))}, {"epsilon", t.epsilon}});
  const WorstCaseConfig &wc = c.evaluation.worst_case;
  json eval{{"robust", robust},
            {"attack", to_json(c.evaluation.attack)},
            {"worst_case",
             {{"norm", std::string(to_string(wc.threat.norm))},
              {"epsilon", wc.threat.epsilon},
              {"attack", to_json(wc.attack)},
              {"exhaustive", wc.exhaustive}}},
            {"ood_sample_size", c.evaluation.ood_sample_size},
            {"ece_bins", c.evaluation.ece_bins},
            {"profile_radii", c.evaluation.profile_radii}};

  json requests = json::array();
  for (const CounterfactualEntry &r : c.counterfactual.requests) {
    json e{{"index", r.index}};
    if (r.target) e["target"] = *r.target;
    requests.push_back(e);
  }
  json cf{{"budgets", c.counterfactual.budgets},
          {"attack", to_json(c.counterfactual.attack)},
          {"requests", requests},
          {"ood_points", c.counterfactual.ood_points}};
  if (c.counterfactual.image) {
    const ImageGeometry &g = *c.counterfactual.image;
    cf["image"] = {{"height", g.height}, {"width", g.width}, {"channels", g.channels}};
  }

  return {{"name", c.name},
          {"seed", c.seed},
          {"out_dir", c.out_dir.string()},
          {"data", data},
          {"train", train},
          {"calibration",
           {{"bins", c.calibration.bins},
            {"grid", {{"count", c.calibration.grid.count}, {"lo", c.calibration.grid.lo}, {"hi", c.calibration.grid.hi}}}}},
          {"evaluation", eval},
          {"counterfactual", cf}};
}

std::string config_hash(const ExperimentConfig &cfg) {
  json j = to_json(cfg);
  j.erase("out_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t dataset_seed(const DatasetEntry &d, std::uint64_t root, std::uint64_t slot) {
  return d.seed ? *d.seed : derive_seed(stage_seed(root, Stage::Data), {slot});
}

std::uint64_t stage_seed(std::uint64_t root, Stage stage) {
  return derive_seed(root, {static_cast<std::uint64_t>(stage)});
}

} // namespace ratio::cli
