#include "ratio/ratio.hpp"

#include <benchmark/benchmark.h>

using namespace ratio;

namespace {

DenseVector uniform_point(Rng &rng, std::size_t d) {
  DenseVector v(d);
  for (double &x : v) x = rng.uniform(0.0, 1.0);
  return v;
}

Classifier model_for(int which) {
  return which == 0 ? Classifier::initialize(Architecture::mlp(2, 2), 1)
                    : Classifier::initialize(
                          Architecture::parse("in=1x28x28 conv:8:3 relu avgpool:2 conv:16:2 relu avgpool:2 dense:10"), 1);
}

void BM_Forward(benchmark::State &state) {
  const Classifier m = model_for(static_cast<int>(state.range(0)));
  Rng rng(1);
  const DenseVector x = uniform_point(rng, m.input_dim());
  for (auto _ : state) benchmark::DoNotOptimize(m.logits(x.span()));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1);

void BM_InputGradient(benchmark::State &state) {
  const Classifier m = model_for(static_cast<int>(state.range(0)));
  Rng rng(2);
  const DenseVector x = uniform_point(rng, m.input_dim());
  const LogitLoss loss = [k = m.num_classes()](std::span<const double> f, std::span<double> df) {
    return cross_entropy_with_grad(LabelTarget::one_hot(0, k), f, df);
  };
  for (auto _ : state) benchmark::DoNotOptimize(m.input_gradient(x, loss));
}
BENCHMARK(BM_InputGradient)->Arg(0)->Arg(1);

void BM_Projection(benchmark::State &state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const DenseVector x = uniform_point(rng, d), z = uniform_point(rng, d);
  const ThreatModel tm = state.range(1) == 0 ? ThreatModel::l2(0.5) : ThreatModel::linf(0.03);
  for (auto _ : state) benchmark::DoNotOptimize(project_threat_model(z, x, tm));
}
BENCHMARK(BM_Projection)->Args({2, 0})->Args({784, 0})->Args({784, 1});

void BM_Pgd(benchmark::State &state) {
  const Classifier m = model_for(0);
  Rng rng(4);
  const DenseVector x = uniform_point(rng, 2);
  PgdConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pgd(m, x, ThreatModel::l2(0.1), CwLogit{0}, cfg));
}
BENCHMARK(BM_Pgd)->Arg(7)->Arg(100);

void BM_Auc(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  ScoreSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.in_scores.push_back(rng.uniform(0.5, 1.0));
    s.out_scores.push_back(rng.uniform(0.5, 1.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(s));
}
BENCHMARK(BM_Auc)->Arg(256)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
