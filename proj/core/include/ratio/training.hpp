#pragma once

#include "ratio/attacks.hpp"
#include "ratio/classifier.hpp"
#include "ratio/data.hpp"
#include "ratio/optimizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ratio {

/// Training objective. Every kind is a special case of
///   mean_in L(e_y, p(z_in)) + lambda * mean_out L(1/K, p(z_out))
/// with z_in in B_2(x, eps_in) and z_out in B_2(x, eps_out).
struct Objective {
  enum class Kind { Plain, OE, AT, ACET, RATIO };

  Kind kind = Kind::Plain;
  double eps_in = 0.0;
  double eps_out = 0.0;
  double lambda = 1.0;
  /// Weight of the clean-point loss in the in-distribution term.
  double clean_in_fraction = 0.0;
  /// ACET only: out-attack steps grow by `ramp_increment` per learning-rate
  /// decay, capped at `ramp_cap`.
  int ramp_increment = 5;
  int ramp_cap = 40;

  static Objective plain() { return {}; }
  static Objective oe(double lambda = 1.0);
  static Objective at(double eps_in);
  static Objective acet(double eps_out, double lambda = 1.0);
  static Objective ratio(double eps_in, double eps_out, double lambda = 1.0,
                         double clean_in_fraction = 0.0);

  bool uses_out_stream() const { return kind == Kind::OE || kind == Kind::ACET || kind == Kind::RATIO; }
  bool attacks_in() const { return kind == Kind::AT || kind == Kind::RATIO; }
  bool attacks_out() const { return kind == Kind::ACET || kind == Kind::RATIO; }

  void validate() const;
};

std::string_view to_string(Objective::Kind k);
Objective::Kind parse_objective_kind(std::string_view s);

enum class Stream { In, Out };

/// Training-time inner maximizer. In-stream: CwLogit PGD in B_2(x, eps_in)
/// for AT/RATIO. Out-stream: PGD on CE(uniform, p(z)) in B_2(x, eps_out) for
/// ACET/RATIO. Every other combination returns x.
DenseVector inner_point(const Objective &objective, const Classifier &model, const DenseVector &x,
                        std::optional<std::size_t> label, Stream stream, const PgdConfig &attack);

/// Stream attack settings for one batch. Example i of a stream attacks with
/// seed derive_seed(seed, {stream, i}).
struct BatchAttacks {
  PgdConfig in;
  PgdConfig out{.steps = 20, .step_size = 0.1, .momentum = 0.9, .restarts = 1};
  std::uint64_t seed = 0;
};

struct BatchLoss {
  double total = 0.0;
  double in_term = 0.0;
  double out_term = 0.0;
};

/// Loss of one batch at its inner points. When `grad` is non-empty it
/// receives the parameter gradient of the cross-entropy terms at those
/// points (overwritten, not accumulated).
BatchLoss batch_loss(const Objective &objective, const Classifier &model, const PointSet &in_batch,
                     const PointSet &out_batch, const BatchAttacks &attacks,
                     std::span<double> grad = {});

/// min(cap, base + increment * decay_events).
int acet_step_ramp(int base_steps, std::size_t lr_decay_events, int increment = 5, int cap = 40);

struct EarlyStopConfig {
  enum class Metric { RobustAccuracy, CleanAccuracy, LastEpoch };

  Metric metric = Metric::RobustAccuracy;
  PgdConfig attack;
  /// Radius of the robust metric when the objective has no eps_in.
  double epsilon = 0.0;
};

struct TrainConfig {
  std::string architecture;
  Objective objective;
  std::size_t in_batch = 128;
  std::size_t out_batch = 128;
  std::size_t epochs = 60;
  OptimizerConfig optimizer;
  PgdConfig attack_in;
  PgdConfig attack_out{.steps = 20, .step_size = 0.1, .momentum = 0.9, .restarts = 1};
  EarlyStopConfig early_stop;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingData {
  const PointSet *in_train = nullptr;
  const PointSet *out_train = nullptr;
  const PointSet *validation = nullptr;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  int out_steps = 0;
  double train_loss = 0.0;
  double clean_acc = 0.0;
  double robust_acc = 0.0;
  double metric = 0.0;
};

struct TrainState {
  std::size_t epoch = 0; // completed epochs
  Classifier model;
  SgdState optimizer;
  Classifier best_model;
  std::optional<std::size_t> best_epoch;
  double best_metric = 0.0;
  std::vector<EpochRecord> history;
};

/// Radius used by the early-stopping robust metric.
double early_stop_epsilon(const TrainConfig &cfg);

/// Epoch loop; deterministic given cfg.seed. The best model by the early
/// stopping metric is retained; later epochs win ties.
TrainState train(const TrainConfig &cfg, const TrainingData &data);

std::string history_csv(const std::vector<EpochRecord> &history);

} // namespace ratio
