#include "ratio/attacks.hpp"

#include "ratio/error.hpp"
#include "ratio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ratio {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::size_t strongest_other(std::span<const double> logits, std::size_t y) {
  std::size_t best = y == 0 ? 1 : 0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != y && logits[i] > logits[best]) best = i;
  return best;
}

} // namespace

double cw_logit_loss(std::span<const double> logits, std::size_t y) {
  if (logits.size() < 2) throw InvalidArgument("cw_logit_loss: need K >= 2");
  if (y >= logits.size()) throw InvalidArgument("cw_logit_loss: label out of range");
  return logits[strongest_other(logits, y)] - logits[y];
}

double attack_loss(const AttackLoss &loss, std::span<const double> logits,
                   std::span<double> dlogits) {
  std::fill(dlogits.begin(), dlogits.end(), 0.0);
  return std::visit(
      overloaded{
          [&](const CwLogit &l) {
            const std::size_t j = strongest_other(logits, l.label);
            dlogits[j] = 1.0;
            dlogits[l.label] = -1.0;
            return logits[j] - logits[l.label];
          },
          [&](const CeToTarget &l) { return cross_entropy_with_grad(l.target, logits, dlogits); },
          [&](const TargetConfidence &l) {
            const ProbabilityVector p = softmax(logits);
            for (std::size_t j = 0; j < logits.size(); ++j) dlogits[j] = -p[j];
            dlogits[l.target] += 1.0;
            std::vector<double> lsm(logits.size());
            log_softmax(logits, lsm);
            return lsm[l.target];
          }},
      loss);
}

double attack_loss(const AttackLoss &loss, std::span<const double> logits) {
  std::vector<double> scratch(logits.size());
  return attack_loss(loss, logits, scratch);
}

void validate(const AttackLoss &loss, std::size_t num_classes) {
  if (num_classes < 2) throw InvalidArgument("attack loss: need K >= 2");
  std::visit(overloaded{[&](const CwLogit &l) {
                          if (l.label >= num_classes)
                            throw InvalidArgument("CwLogit: label out of range");
                        },
                        [&](const CeToTarget &l) {
                          require_same_dim(l.target.num_classes(), num_classes, "CeToTarget");
                        },
                        [&](const TargetConfidence &l) {
                          if (l.target >= num_classes)
                            throw InvalidArgument("TargetConfidence: class out of range");
                        }},
             loss);
}

void PgdConfig::validate() const {
  if (steps < 0) throw InvalidArgument("pgd: steps must be >= 0");
  if (!(step_size > 0.0)) throw InvalidArgument("pgd: step_size must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw InvalidArgument("pgd: momentum must lie in [0, 1)");
  if (restarts < 1) throw InvalidArgument("pgd: restarts must be >= 1");
}

DenseVector random_feasible_point(const DenseVector &x, const ThreatModel &tm,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const double half = tm.norm == Norm::L2
                          ? tm.epsilon / std::sqrt(static_cast<double>(std::max<std::size_t>(x.size(), 1)))
                          : tm.epsilon;
  DenseVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + rng.uniform(-half, half);
  project_in_place(z.span(), x.span(), tm);
  return z;
}

AttackResult pgd(const Classifier &model, const DenseVector &x, const ThreatModel &tm,
                 const AttackLoss &loss, const PgdConfig &cfg, std::span<const double> start) {
  cfg.validate();
  validate(loss, model.num_classes());
  require_same_dim(x.size(), model.input_dim(), "pgd");

  const LogitLoss objective = [&loss](std::span<const double> f, std::span<double> df) {
    return attack_loss(loss, f, df);
  };
  const auto value_at = [&](std::span<const double> z) {
    return attack_loss(loss, model.logits(z));
  };

  AttackResult result;
  result.z_best = x;
  result.loss_best = value_at(x.span());

  DenseVector z;
  if (!start.empty()) {
    require_same_dim(start.size(), x.size(), "pgd start");
    z = DenseVector(start);
    project_in_place(z.span(), x.span(), tm);
  } else if (cfg.random_init) {
    z = random_feasible_point(x, tm, derive_seed(cfg.seed, {0x1417}));
  } else {
    z = x;
  }

  const std::size_t d = x.size();
  Rng rng(derive_seed(cfg.seed, {0xd1ec}));
  std::vector<double> grad(d), momentum(d, 0.0), dir(d, 0.0), unit(d);
  bool have_dir = false;

  for (int k = 0;; ++k) {
    const double value = k < cfg.steps ? model.input_gradient(z.span(), objective, grad)
                                       : value_at(z.span());
    result.trajectory_losses.push_back(value);
    if (value > result.loss_best) {
      result.loss_best = value;
      result.z_best = z;
    }
    if (k == cfg.steps) break;

    const double gn = norm2(grad);
    bool have_unit = true;
    if (gn > 0.0 && std::isfinite(gn)) {
      for (std::size_t i = 0; i < d; ++i) unit[i] = grad[i] / gn;
    } else if (!have_dir) {
      for (std::size_t i = 0; i < d; ++i) unit[i] = rng.normal();
      const double un = norm2(unit);
      for (double &u : unit) u /= un;
    } else {
      have_unit = false;
    }

    for (std::size_t i = 0; i < d; ++i)
      momentum[i] = cfg.momentum * momentum[i] + (have_unit ? unit[i] : 0.0);
    const double mn = norm2(momentum);
    if (have_unit && mn > 0.0) {
      for (std::size_t i = 0; i < d; ++i) dir[i] = momentum[i] / mn;
      have_dir = true;
    }
    for (std::size_t i = 0; i < d; ++i) z[i] += cfg.step_size * dir[i];
    project_in_place(z.span(), x.span(), tm);
  }
  result.score = result.loss_best;
  return result;
}

AttackResult pgd_restarts(const Classifier &model, const DenseVector &x, const ThreatModel &tm,
                          const AttackLoss &loss, const PgdConfig &cfg,
                          std::span<const double> start) {
  cfg.validate();
  AttackResult best = pgd(model, x, tm, loss, cfg, start);
  for (int r = 1; r < cfg.restarts; ++r) {
    PgdConfig run = cfg;
    run.random_init = true;
    run.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
    AttackResult res = pgd(model, x, tm, loss, run);
    if (res.loss_best > best.loss_best) {
      best = std::move(res);
      best.restart_index = r;
    }
  }
  return best;
}

AttackResult maximize_confidence(const Classifier &model, const DenseVector &x,
                                 const ThreatModel &tm, ConfidenceTarget target,
                                 const PgdConfig &cfg, std::span<const double> start) {
  const auto run_for = [&](std::size_t t) {
    AttackResult res = pgd_restarts(model, x, tm, TargetConfidence{t}, cfg, start);
    res.score = softmax(model.logits(res.z_best.span()))[t];
    return res;
  };

  switch (target.mode) {
  case ConfidenceTarget::Mode::Class:
    if (target.cls >= model.num_classes())
      throw InvalidArgument("maximize_confidence: target class out of range");
    return run_for(target.cls);
  case ConfidenceTarget::Mode::Predicted:
    return run_for(model.predict(x.span()));
  case ConfidenceTarget::Mode::AnyClass: {
    AttackResult best = run_for(0);
    for (std::size_t t = 1; t < model.num_classes(); ++t) {
      AttackResult res = run_for(t);
      if (res.score > best.score) best = std::move(res);
    }
    return best;
  }
  }
  throw InvalidArgument("maximize_confidence: unknown target mode");
}

} // namespace ratio
