#include "ratio/training.hpp"

#include "ratio/error.hpp"
#include "ratio/evaluation.hpp"
#include "ratio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ratio {

namespace {

constexpr std::uint64_t kInTag = 1;
constexpr std::uint64_t kOutTag = 2;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

} // namespace

Objective Objective::oe(double lambda) {
  Objective o;
  o.kind = Kind::OE;
  o.lambda = lambda;
  return o;
}

Objective Objective::at(double eps_in) {
  Objective o;
  o.kind = Kind::AT;
  o.eps_in = eps_in;
  return o;
}

Objective Objective::acet(double eps_out, double lambda) {
  Objective o;
  o.kind = Kind::ACET;
  o.eps_out = eps_out;
  o.lambda = lambda;
  return o;
}

Objective Objective::ratio(double eps_in, double eps_out, double lambda, double clean_in_fraction) {
  Objective o;
  o.kind = Kind::RATIO;
  o.eps_in = eps_in;
  o.eps_out = eps_out;
  o.lambda = lambda;
  o.clean_in_fraction = clean_in_fraction;
  return o;
}

void Objective::validate() const {
  if (!(eps_in >= 0.0) || !(eps_out >= 0.0)) throw InvalidArgument("objective: radii must be >= 0");
  if (!(lambda >= 0.0)) throw InvalidArgument("objective: lambda must be >= 0");
  if (!(clean_in_fraction >= 0.0 && clean_in_fraction <= 1.0))
    throw InvalidArgument("objective: clean_in_fraction must lie in [0,1]");
  if (ramp_increment < 0 || ramp_cap < 0) throw InvalidArgument("objective: bad ACET ramp");
}

std::string_view to_string(Objective::Kind k) {
  switch (k) {
  case Objective::Kind::Plain: return "plain";
  case Objective::Kind::OE: return "oe";
  case Objective::Kind::AT: return "at";
  case Objective::Kind::ACET: return "acet";
  case Objective::Kind::RATIO: return "ratio";
  }
  return "?";
}

Objective::Kind parse_objective_kind(std::string_view s) {
  for (auto k : {Objective::Kind::Plain, Objective::Kind::OE, Objective::Kind::AT,
                 Objective::Kind::ACET, Objective::Kind::RATIO})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown objective '" + std::string(s) + "'");
}

DenseVector inner_point(const Objective &objective, const Classifier &model, const DenseVector &x,
                        std::optional<std::size_t> label, Stream stream, const PgdConfig &attack) {
  if (stream == Stream::In) {
    if (!label) throw InvalidArgument("inner_point: in-distribution stream requires a label");
    if (!objective.attacks_in() || objective.eps_in == 0.0) return x;
    return pgd(model, x, ThreatModel::l2(objective.eps_in), CwLogit{*label}, attack).z_best;
  }
  if (!objective.attacks_out() || objective.eps_out == 0.0) return x;
  return pgd(model, x, ThreatModel::l2(objective.eps_out),
             CeToTarget{LabelTarget::uniform(model.num_classes())}, attack)
      .z_best;
}

BatchLoss batch_loss(const Objective &objective, const Classifier &model, const PointSet &in_batch,
                     const PointSet &out_batch, const BatchAttacks &attacks, std::span<double> grad) {
  objective.validate();
  if (!grad.empty()) {
    require_same_dim(grad.size(), model.num_params(), "batch_loss gradient");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  if (in_batch.empty()) throw InvalidArgument("batch_loss: empty in-distribution batch");
  if (!in_batch.labeled()) throw InvalidArgument("batch_loss: in-distribution stream requires labels");

  const std::size_t k = model.num_classes();
  const auto ce_at = [&](const DenseVector &z, const LabelTarget &target, double scale) {
    const LogitLoss loss = [&target](std::span<const double> f, std::span<double> df) {
      return cross_entropy_with_grad(target, f, df);
    };
    if (grad.empty()) return cross_entropy(target, softmax(model.logits(z.span())));
    return model.accumulate_parameter_gradient(z.span(), loss, grad, scale);
  };

  BatchLoss out;
  const double c = objective.clean_in_fraction;
  const auto n_in = static_cast<double>(in_batch.size());
  for (std::size_t i = 0; i < in_batch.size(); ++i) {
    const DenseVector &x = in_batch.points[i];
    const LabelTarget target = LabelTarget::one_hot(in_batch.labels[i], k);
    double l = 0.0;
    if (c > 0.0) l += c * ce_at(x, target, c / n_in);
    if (c < 1.0) {
      PgdConfig run = attacks.in;
      run.seed = derive_seed(attacks.seed, {kInTag, i});
      const DenseVector z = inner_point(objective, model, x, in_batch.labels[i], Stream::In, run);
      l += (1.0 - c) * ce_at(z, target, (1.0 - c) / n_in);
    }
    out.in_term += l / n_in;
  }
  out.total = out.in_term;

  if (!objective.uses_out_stream() || objective.lambda == 0.0) return out;
  if (out_batch.empty()) throw InvalidArgument("batch_loss: objective needs an out-distribution batch");

  const LabelTarget uniform = LabelTarget::uniform(k);
  const auto n_out = static_cast<double>(out_batch.size());
  for (std::size_t i = 0; i < out_batch.size(); ++i) {
    PgdConfig run = attacks.out;
    run.seed = derive_seed(attacks.seed, {kOutTag, i});
    const DenseVector z = inner_point(objective, model, out_batch.points[i], std::nullopt, Stream::Out, run);
    out.out_term += ce_at(z, uniform, objective.lambda / n_out) / n_out;
  }
  out.total = out.in_term + objective.lambda * out.out_term;
  return out;
}

int acet_step_ramp(int base_steps, std::size_t lr_decay_events, int increment, int cap) {
  if (base_steps < 0) throw InvalidArgument("acet_step_ramp: base must be >= 0");
  const long long steps = base_steps + static_cast<long long>(increment) * static_cast<long long>(lr_decay_events);
  return static_cast<int>(std::min<long long>(cap, steps));
}

void TrainConfig::validate() const {
  objective.validate();
  optimizer.validate();
  attack_in.validate();
  attack_out.validate();
  early_stop.attack.validate();
  if (in_batch < 1) throw ConfigError("train: in_batch must be >= 1");
  if (objective.uses_out_stream() && out_batch < 1) throw ConfigError("train: out_batch must be >= 1");
  if (!(early_stop.epsilon >= 0.0)) throw ConfigError("train: early_stop.epsilon must be >= 0");
}

double early_stop_epsilon(const TrainConfig &cfg) {
  return cfg.objective.attacks_in() && cfg.objective.eps_in > 0.0 ? cfg.objective.eps_in
                                                                  : cfg.early_stop.epsilon;
}

TrainState train(const TrainConfig &cfg, const TrainingData &data) {
  cfg.validate();
  if (!data.in_train || data.in_train->empty())
    throw ConfigError("train: in-distribution training stream is empty");
  if (!data.in_train->labeled()) throw ConfigError("train: in-distribution stream must be labeled");
  if (cfg.objective.uses_out_stream() && (!data.out_train || data.out_train->empty()))
    throw ConfigError("train: objective '" + std::string(to_string(cfg.objective.kind)) +
                      "' needs a non-empty out-distribution stream");
  if (cfg.epochs > 0 && cfg.early_stop.metric != EarlyStopConfig::Metric::LastEpoch &&
      (!data.validation || data.validation->empty()))
    throw ConfigError("train: early stopping needs a non-empty validation split");

  const Architecture arch = Architecture::parse(cfg.architecture);
  if (arch.input_dim() != data.in_train->dim)
    throw ConfigError("train: architecture input size does not match the data dimension");

  Classifier model = Classifier::initialize(arch, derive_seed(cfg.seed, {0x1417}));
  TrainState state{0, model, {}, model, std::nullopt, 0.0, {}};

  const LrSchedule schedule(cfg.optimizer, cfg.epochs);
  const PointSet &in = *data.in_train;
  std::vector<double> grad(model.num_params());
  const double es_eps = early_stop_epsilon(cfg);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch);
    BatchAttacks attacks;
    attacks.in = cfg.attack_in;
    attacks.out = cfg.attack_out;
    if (cfg.objective.kind == Objective::Kind::ACET)
      attacks.out.steps = acet_step_ramp(cfg.attack_out.steps, schedule.decay_events(epoch),
                                         cfg.objective.ramp_increment, cfg.objective.ramp_cap);

    Rng in_rng(derive_seed(cfg.seed, {0xe90c, epoch, kInTag}));
    const std::vector<std::size_t> order = in_rng.permutation(in.size());

    // out stream cycles through fresh permutations when exhausted
    std::vector<std::size_t> out_order;
    std::size_t out_cursor = 0, out_pass = 0;
    const auto next_out = [&]() {
      if (out_cursor == out_order.size()) {
        Rng r(derive_seed(cfg.seed, {0xe90c, epoch, kOutTag, out_pass++}));
        out_order = r.permutation(data.out_train->size());
        out_cursor = 0;
      }
      return out_order[out_cursor++];
    };

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < in.size(); start += cfg.in_batch, ++batches) {
      const std::size_t stop = std::min(in.size(), start + cfg.in_batch);
      const PointSet in_batch =
          in.subset(std::span<const std::size_t>(order).subspan(start, stop - start));
      PointSet out_batch;
      if (cfg.objective.uses_out_stream()) {
        std::vector<std::size_t> idx(cfg.out_batch);
        for (std::size_t &i : idx) i = next_out();
        out_batch = data.out_train->subset(idx).unlabeled();
      }
      attacks.seed = derive_seed(cfg.seed, {0xba7c, epoch, batches});
      const BatchLoss bl = batch_loss(cfg.objective, state.model, in_batch, out_batch, attacks, grad);
      loss_sum += bl.total;
      sgd_step(state.model.mutable_params(), grad, state.optimizer, cfg.optimizer, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.out_steps = attacks.out.steps;
    rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1));
    if (data.validation && !data.validation->empty()) {
      rec.clean_acc = clean_accuracy(state.model, *data.validation);
      PgdConfig es = cfg.early_stop.attack;
      es.seed = derive_seed(cfg.seed, {0xe5, epoch});
      rec.robust_acc = robust_accuracy(state.model, *data.validation, ThreatModel::l2(es_eps), es);
    }
    switch (cfg.early_stop.metric) {
    case EarlyStopConfig::Metric::RobustAccuracy: rec.metric = rec.robust_acc; break;
    case EarlyStopConfig::Metric::CleanAccuracy: rec.metric = rec.clean_acc; break;
    case EarlyStopConfig::Metric::LastEpoch: rec.metric = static_cast<double>(epoch); break;
    }
    state.history.push_back(rec);
    state.epoch = epoch + 1;
    if (!state.best_epoch || rec.metric >= state.best_metric) {
      state.best_metric = rec.metric;
      state.best_epoch = epoch;
      state.best_model = state.model;
    }
  }
  return state;
}

std::string history_csv(const std::vector<EpochRecord> &history) {
  std::ostringstream out;
  out << "epoch,lr,out_steps,train_loss,clean_acc,robust_acc\n";
  for (const EpochRecord &r : history)
    out << r.epoch << ',' << fmt(r.lr) << ',' << r.out_steps << ',' << fmt(r.train_loss) << ','
        << fmt(r.clean_acc) << ',' << fmt(r.robust_acc) << '\n';
  return out.str();
}

} // namespace ratio
