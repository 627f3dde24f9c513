#pragma once

#include "ratio/classifier.hpp"
#include "ratio/probability.hpp"
#include "ratio/tensor.hpp"
#include "ratio/threat_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ratio {

/// Margin max_{i != y} f_i - f_y; positive iff z is misclassified w.r.t. y.
struct CwLogit {
  std::size_t label;
};
/// Cross-entropy of softmax(f) against a target distribution.
struct CeToTarget {
  LabelTarget target;
};
/// log softmax(f)_t; ascent increases the confidence in class t.
struct TargetConfidence {
  std::size_t target;
};

using AttackLoss = std::variant<CwLogit, CeToTarget, TargetConfidence>;

double cw_logit_loss(std::span<const double> logits, std::size_t y);

/// Value of `loss` at the logits and its logit gradient.
double attack_loss(const AttackLoss &loss, std::span<const double> logits,
                   std::span<double> dlogits);
double attack_loss(const AttackLoss &loss, std::span<const double> logits);

void validate(const AttackLoss &loss, std::size_t num_classes);

struct PgdConfig {
  int steps = 7;
  /// Length of each step along the l2-normalized momentum direction.
  double step_size = 0.1;
  double momentum = 0.9;
  int restarts = 1;
  /// Start the first run from a random feasible point instead of x.
  bool random_init = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AttackResult {
  DenseVector z_best;
  double loss_best = 0.0;
  /// Loss at z_0, z_1, ..., z_steps of the run that produced z_best.
  std::vector<double> trajectory_losses;
  int restart_index = 0;
  /// Reported statistic: loss_best for pgd; p_t(z_best) for confidence attacks.
  double score = 0.0;
};

/// Momentum PGD ascent on `loss` over T(x). Evaluates the loss at x and at
/// every iterate and returns the best one. `start`, when non-empty, replaces
/// the initial point (after projection); used for warm-started sweeps.
AttackResult pgd(const Classifier &model, const DenseVector &x, const ThreatModel &tm,
                 const AttackLoss &loss, const PgdConfig &cfg,
                 std::span<const double> start = {});

/// cfg.restarts runs of pgd: run 0 as configured (from x or `start`), later
/// runs from random feasible points with seeds derived from cfg.seed.
AttackResult pgd_restarts(const Classifier &model, const DenseVector &x, const ThreatModel &tm,
                          const AttackLoss &loss, const PgdConfig &cfg,
                          std::span<const double> start = {});

struct ConfidenceTarget {
  enum class Mode { Class, Predicted, AnyClass };
  Mode mode = Mode::Predicted;
  std::size_t cls = 0;

  static ConfidenceTarget of(std::size_t c) { return {Mode::Class, c}; }
  static ConfidenceTarget predicted() { return {Mode::Predicted, 0}; }
  /// Exhaustive: attack every class, keep the most confident result.
  static ConfidenceTarget any_class() { return {Mode::AnyClass, 0}; }
};

/// Maximizes log p_t(z) over T(x) with restarts; result.score = p_t(z_best).
AttackResult maximize_confidence(const Classifier &model, const DenseVector &x,
                                 const ThreatModel &tm, ConfidenceTarget target,
                                 const PgdConfig &cfg, std::span<const double> start = {});

/// Uniform draw from the l_inf cube inscribed in the threat model, projected.
DenseVector random_feasible_point(const DenseVector &x, const ThreatModel &tm,
                                  std::uint64_t seed);

} // namespace ratio
