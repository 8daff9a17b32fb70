#include <random>

#include <benchmark/benchmark.h>

#include "tkgx/eval.hpp"
#include "tkgx/patterns.hpp"
#include "tkgx/synthetic.hpp"
#include "tkgx/training.hpp"

namespace {

using namespace tkgx;

std::vector<Quadruple> random_facts(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> e(0, 99), r(0, 19), t(0, 29);
  std::vector<Quadruple> out(n);
  for (auto& q : out) q = {e(rng), r(rng), e(rng), t(rng)};
  return out;
}

void BM_BuildRppg(benchmark::State& state) {
  const auto facts = random_facts(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_rppg(facts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildRppg)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_BuildTspg(benchmark::State& state) {
  const auto facts = random_facts(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_tspg(facts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildTspg)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_Score(benchmark::State& state) {
  const auto kind = static_cast<ScoreKind>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Eigen::VectorXd s(128), r(128), o(128), t(128);
  for (auto* v : {&s, &r, &o, &t})
    for (auto& x : *v) x = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(score(kind, s, r, o, t));
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Score)->DenseRange(0, 5);

// Encoding one sampled task: features, pattern graphs and GCN layers.
void BM_EmbedTask(benchmark::State& state) {
  const Tkg g = make_planted_tkg({});
  SamplerConfig sc;
  sc.l2 = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  const TaskSample task = sample_task(g, sc, rng);
  ModelConfig mc;
  mc.dim = 32;
  mc.hidden = 32;
  const Model model(mc, {g.entities().size(), g.relations().size(), g.timestamps().size()}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(model.embed(task, false));
}
BENCHMARK(BM_EmbedTask)->Arg(6)->Arg(20);

// One task's loss and gradient through the whole model.
void BM_TaskGradient(benchmark::State& state) {
  const Tkg g = make_planted_tkg({});
  SamplerConfig sc;
  sc.l2 = 20;
  std::mt19937_64 rng(5);
  const TaskSample task = sample_task(g, sc, rng);
  TrainConfig cfg;
  cfg.model.dim = 32;
  cfg.model.hidden = 32;
  cfg.n_neg = 32;
  const Model model(cfg.model, {g.entities().size(), g.relations().size(), g.timestamps().size()}, 0);
  const TaskSample* one[] = {&task};
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_and_gradient(model, one, cfg, 0).loss);
}
BENCHMARK(BM_TaskGradient);

}  // namespace

BENCHMARK_MAIN();
