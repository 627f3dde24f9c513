#include "doctest.h"
#include "test_support.hpp"

using namespace ratio;
using doctest::Approx;

namespace {

PointSet toy_in(std::uint64_t seed, std::size_t n = 64) {
  GaussianMixture2D g;
  g.means = {{-1.5, 0.0}, {1.5, 0.0}};
  g.cov = {0.1, 0.0, 0.1};
  g.n = n;
  return generate({g, seed});
}

PointSet toy_out(std::uint64_t seed, std::size_t n = 64) {
  Rings2D r;
  r.n = n;
  return generate({r, seed});
}

BatchAttacks quick_attacks(std::uint64_t seed) {
  BatchAttacks a;
  a.in.steps = 5;
  a.out.steps = 5;
  a.seed = seed;
  return a;
}

TrainConfig quick_config(Objective obj, std::size_t epochs) {
  TrainConfig cfg;
  cfg.architecture = "in=2 dense:16 relu dense:2";
  cfg.objective = obj;
  cfg.epochs = epochs;
  cfg.in_batch = 32;
  cfg.out_batch = 32;
  cfg.attack_in.steps = 3;
  cfg.attack_out.steps = 3;
  cfg.early_stop.attack.steps = 3;
  cfg.early_stop.epsilon = 0.05;
  cfg.seed = 99;
  return cfg;
}

} // namespace

TEST_CASE("inner_point examples") {
  const Classifier m = Classifier::initialize(Architecture::mlp(2, 2, {8}), 1);
  const DenseVector x{0.4, 0.6};
  PgdConfig cfg;

  CHECK(inner_point(Objective::plain(), m, x, 0, Stream::In, cfg) == x);
  CHECK(inner_point(Objective::plain(), m, x, std::nullopt, Stream::Out, cfg) == x);
  CHECK(inner_point(Objective::oe(), m, x, std::nullopt, Stream::Out, cfg) == x);
  CHECK(inner_point(Objective::at(0.0), m, x, 1, Stream::In, cfg) == x);

  const DenseVector z = inner_point(Objective::at(0.1), m, x, 1, Stream::In, cfg);
  CHECK(ThreatModel::l2(0.1).contains(z.span(), x.span()));
  CHECK(cw_logit_loss(m.logits(z.span()), 1) >= cw_logit_loss(m.logits(x.span()), 1));

  const Classifier flat = testing::constant_model(2, 3);
  const DenseVector zo = inner_point(Objective::ratio(0.1, 0.2), flat, x, std::nullopt, Stream::Out, cfg);
  CHECK(ThreatModel::l2(0.2).contains(zo.span(), x.span()));
  const LabelTarget u = LabelTarget::uniform(3);
  CHECK(cross_entropy(u, softmax(flat.logits(zo.span()))) == cross_entropy(u, softmax(flat.logits(x.span()))));

  CHECK_THROWS_AS(inner_point(Objective::at(0.1), m, x, std::nullopt, Stream::In, cfg), InvalidArgument);
}

TEST_CASE("batch_loss examples") {
  SUBCASE("plain reduces to cross-entropy") {
    // logits [log 0.8, log 0.2] give p_y = 0.8 for y = 0
    const Classifier m(Architecture::parse("in=1 dense:2"), {0.0, 0.0, std::log(0.8), std::log(0.2)});
    PointSet in;
    in.dim = 1;
    in.points = {DenseVector{0.5}};
    in.labels = {0};
    const BatchLoss l = batch_loss(Objective::plain(), m, in, {}, quick_attacks(1));
    CHECK(l.total == Approx(0.22314355131420976).epsilon(1e-12));
  }
  SUBCASE("outlier exposure on a uniform model is 2 log K") {
    const Classifier m = testing::constant_model(2, 4);
    const PointSet in = toy_in(3, 8), out = toy_out(4, 8);
    const BatchLoss l = batch_loss(Objective::oe(1.0), m, in, out, quick_attacks(1));
    CHECK(l.in_term == Approx(std::log(4.0)));
    CHECK(l.out_term == Approx(std::log(4.0)));
    CHECK(l.total == Approx(2.0 * std::log(4.0)));
  }
  SUBCASE("missing streams are errors") {
    const Classifier m = testing::constant_model(2, 2);
    CHECK_THROWS_AS(batch_loss(Objective::oe(), m, toy_in(1, 4), {}, quick_attacks(1)), InvalidArgument);
    CHECK_THROWS_AS(batch_loss(Objective::plain(), m, toy_in(1, 4).unlabeled(), {}, quick_attacks(1)),
                    InvalidArgument);
  }
}

TEST_CASE("objective reduction identities are bit-exact") {
  const Classifier m = Classifier::initialize(Architecture::mlp(2, 2, {16}), 13);
  const PointSet in = toy_in(5, 24), out = toy_out(6, 24);
  const BatchAttacks a = quick_attacks(42);
  std::vector<double> g1(m.num_params()), g2(m.num_params());

  const auto same = [&](const Objective &lhs, const Objective &rhs) {
    const BatchLoss l1 = batch_loss(lhs, m, in, out, a, g1);
    const BatchLoss l2 = batch_loss(rhs, m, in, out, a, g2);
    CHECK(l1.total == l2.total);
    CHECK(g1 == g2);
  };
  same(Objective::ratio(0.05, 0.2, 0.0), Objective::at(0.05));
  same(Objective::at(0.0), Objective::plain());
  same(Objective::acet(0.0, 1.0), Objective::oe(1.0));
  same(Objective::ratio(0.0, 0.2, 1.0, 0.0), Objective::acet(0.2, 1.0));
}

TEST_CASE("clean fraction mixes clean and adversarial losses") {
  const Classifier m = Classifier::initialize(Architecture::mlp(2, 2, {16}), 13);
  const PointSet in = toy_in(5, 16);
  const BatchAttacks a = quick_attacks(7);
  const double clean = batch_loss(Objective::plain(), m, in, {}, a).total;
  const double adv = batch_loss(Objective::at(0.1), m, in, {}, a).total;
  Objective half = Objective::ratio(0.1, 0.0, 0.0, 0.5);
  CHECK(batch_loss(half, m, in, {}, a).total == Approx(0.5 * clean + 0.5 * adv).epsilon(1e-12));
}

TEST_CASE("batch gradient matches finite differences of the loss at fixed inner points") {
  const Classifier m = Classifier::initialize(Architecture::mlp(2, 2, {8}), 3);
  const PointSet in = toy_in(8, 6), out = toy_out(9, 6);
  std::vector<double> g(m.num_params());
  batch_loss(Objective::oe(0.7), m, in, out, quick_attacks(1), g);
  Rng rng(4);
  std::vector<double> dir(m.num_params());
  for (double &v : dir) v = rng.normal();
  const double h = 1e-6;
  Classifier up = m, down = m;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    up.mutable_params()[i] += h * dir[i];
    down.mutable_params()[i] -= h * dir[i];
  }
  const double fd = (batch_loss(Objective::oe(0.7), up, in, out, quick_attacks(1)).total -
                     batch_loss(Objective::oe(0.7), down, in, out, quick_attacks(1)).total) /
                    (2 * h);
  CHECK(fd == Approx(dot(g, dir)).epsilon(1e-5));
}

TEST_CASE("acet_step_ramp examples") {
  CHECK(acet_step_ramp(20, 0, 5, 40) == 20);
  CHECK(acet_step_ramp(20, 2, 5, 40) == 30);
  CHECK(acet_step_ramp(20, 9, 5, 40) == 40);
  CHECK(acet_step_ramp(20, 2) == 30);
  CHECK_THROWS_AS(acet_step_ramp(-1, 0), InvalidArgument);
}

TEST_CASE("train with zero epochs returns the initialized model") {
  const PointSet in = toy_in(1);
  TrainConfig cfg = quick_config(Objective::plain(), 0);
  const TrainState s = train(cfg, {&in, nullptr, nullptr});
  CHECK(s.epoch == 0);
  CHECK(s.history.empty());
  CHECK(s.model == Classifier::initialize(Architecture::parse(cfg.architecture), derive_seed(cfg.seed, {0x1417})));
  CHECK(s.best_model == s.model);
}

TEST_CASE("plain training separates a linearly separable toy") {
  const PointSet all = toy_in(21, 400);
  const Splits sp = split(all, {0.6, 0.2, 0.2, 1});

  // independent oracle: logistic regression by full-batch gradient descent
  double w0 = 0, w1 = 0, b = 0;
  for (int it = 0; it < 2000; ++it) {
    double g0 = 0, g1 = 0, gb = 0;
    for (std::size_t i = 0; i < sp.train.size(); ++i) {
      const auto &x = sp.train.points[i];
      const double s = 1.0 / (1.0 + std::exp(-(w0 * x[0] + w1 * x[1] + b)));
      const double e = s - static_cast<double>(sp.train.labels[i]);
      g0 += e * x[0];
      g1 += e * x[1];
      gb += e;
    }
    w0 -= 1.0 * g0 / sp.train.size();
    w1 -= 1.0 * g1 / sp.train.size();
    b -= 1.0 * gb / sp.train.size();
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < sp.test.size(); ++i) {
    const auto &x = sp.test.points[i];
    ok += ((w0 * x[0] + w1 * x[1] + b) > 0.0) == (sp.test.labels[i] == 1);
  }
  REQUIRE(static_cast<double>(ok) / sp.test.size() >= 0.99);

  TrainConfig cfg = quick_config(Objective::plain(), 60);
  cfg.architecture = Architecture::mlp(2, 2).descriptor();
  cfg.early_stop.metric = EarlyStopConfig::Metric::CleanAccuracy;
  const TrainState s = train(cfg, {&sp.train, nullptr, &sp.val});
  CHECK(clean_accuracy(s.best_model, sp.test) >= 0.99);
}

TEST_CASE("AT with eps 0 follows the plain trajectory exactly") {
  const PointSet all = toy_in(2, 120);
  const Splits sp = split(all, {0.7, 0.3, 0.0, 2});
  const TrainState plain = train(quick_config(Objective::plain(), 4), {&sp.train, nullptr, &sp.val});
  const TrainState at0 = train(quick_config(Objective::at(0.0), 4), {&sp.train, nullptr, &sp.val});
  CHECK(plain.model == at0.model);
  CHECK(plain.best_model == at0.best_model);
}

TEST_CASE("training is reproducible and keeps the best checkpoint") {
  const PointSet all = toy_in(3, 120);
  const Splits sp = split(all, {0.7, 0.3, 0.0, 3});
  const PointSet out = toy_out(4, 50);
  const TrainConfig cfg = quick_config(Objective::ratio(0.05, 0.1), 5);
  const TrainState a = train(cfg, {&sp.train, &out, &sp.val});
  const TrainState b = train(cfg, {&sp.train, &out, &sp.val});
  CHECK(a.model == b.model);
  CHECK(a.best_model == b.best_model);
  REQUIRE(a.history.size() == 5);
  double best = -1.0;
  for (const EpochRecord &r : a.history) best = std::max(best, r.metric);
  CHECK(a.best_metric == best);
  CHECK(a.history[*a.best_epoch].metric == best);
  CHECK(history_csv(a.history).rfind("epoch,lr,out_steps,train_loss,clean_acc,robust_acc\n", 0) == 0);
}

TEST_CASE("ACET ramps its out-attack steps with the learning-rate decays") {
  const PointSet all = toy_in(3, 40);
  const PointSet out = toy_out(4, 40);
  TrainConfig cfg = quick_config(Objective::acet(0.1), 10);
  cfg.attack_out.steps = 2;
  cfg.early_stop.metric = EarlyStopConfig::Metric::LastEpoch;
  const TrainState s = train(cfg, {&all, &out, nullptr});
  // milestones at epochs 5, 8 (7.5 rounds to 8) and 9
  CHECK(s.history[0].out_steps == 2);
  CHECK(s.history[5].out_steps == 7);
  CHECK(s.history[8].out_steps == 12);
  CHECK(s.history[9].out_steps == 17);
  CHECK(*s.best_epoch == 9);
}

TEST_CASE("train reports configuration errors") {
  const PointSet in = toy_in(1, 20);
  CHECK_THROWS_AS(train(quick_config(Objective::oe(), 1), {&in, nullptr, &in}), ConfigError);
  PointSet empty;
  CHECK_THROWS_AS(train(quick_config(Objective::plain(), 1), {&empty, nullptr, &in}), ConfigError);
  CHECK_THROWS_AS(train(quick_config(Objective::plain(), 1), {&in, nullptr, nullptr}), ConfigError);
  TrainConfig bad = quick_config(Objective::plain(), 1);
  bad.architecture = "in=3 dense:2";
  CHECK_THROWS_AS(train(bad, {&in, nullptr, &in}), ConfigError);
  CHECK_THROWS_AS(Objective::ratio(0.1, 0.1, 1.0, 1.5).validate(), InvalidArgument);
}
