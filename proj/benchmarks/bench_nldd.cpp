#include <benchmark/benchmark.h>

#include <random>

#include "nldd/eval.hpp"
#include "nldd/nldd.hpp"

using namespace nldd;

namespace {

Dataset synthetic(Index n) {
  SyntheticParams p;
  p.n = n;
  return generate_synthetic(p);
}

void BM_FitLogistic(benchmark::State& state) {
  const auto data = synthetic(static_cast<Index>(state.range(0)));
  const auto z = standardize_apply(standardize_fit(data), data.features);
  Labelset target(data.rows());
  for (Index i = 0; i < data.rows(); ++i) target[i] = data.labels(i, 0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic(z, target));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitLogistic)->Arg(200)->Arg(1000)->Arg(5000);

void BM_MinePairs(benchmark::State& state) {
  const auto data = synthetic(static_cast<Index>(state.range(0)));
  const auto z = standardize_apply(standardize_fit(data), data.features);
  const std::vector<double> query(data.feature_count(), 0.1), p_hat(data.label_count(), 0.4);
  const Labelset truth(data.label_count(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(mine_pairs(p_hat, truth, query, z, data.labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MinePairs)->Arg(200)->Arg(2000)->Arg(20000);

void BM_FitBinomialGlm(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ux(0.0, 20.0), uy(0.0, 2.0), u(0.0, 1.0);
  std::vector<DistancePair> pairs(static_cast<Index>(state.range(0)));
  for (auto& p : pairs) {
    p.dx = ux(gen);
    p.dy = uy(gen);
    const double t = inverse_logit(-3.5 + 0.0134 * p.dx + 1.83 * p.dy);
    for (int l = 0; l < 6; ++l) p.loss += u(gen) < t;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_binomial_glm(pairs, 6));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitBinomialGlm)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_NlddTrain(benchmark::State& state) {
  const auto data = synthetic(static_cast<Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nldd_train(data));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NlddTrain)->RangeMultiplier(2)->Range(200, 1600)->Complexity(benchmark::oNSquared);

void BM_NlddPredict(benchmark::State& state) {
  const auto data = synthetic(static_cast<Index>(state.range(0)));
  const auto model = nldd_train(data);
  const std::vector<double> x(data.feature_count(), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(predict_with_confidence(model, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NlddPredict)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

}  // namespace

BENCHMARK_MAIN();
