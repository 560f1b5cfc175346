#include <benchmark/benchmark.h>

#include "adaptthink/metrics.hpp"
#include "adaptthink/trainer.hpp"

using namespace adaptthink;

namespace {

void BM_SampleResponse(benchmark::State& state) {
  const PolicyParams params = PolicyParams::defaults();
  const Problem prob{0, 3};
  RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_response(params, prob, std::nullopt, rng));
  }
}
BENCHMARK(BM_SampleResponse);

void BM_LogProb(benchmark::State& state) {
  const PolicyParams params = PolicyParams::defaults();
  const Problem prob{0, 3};
  const Response resp = make_response(params, ThinkingMode::Thinking, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_prob(params, prob, resp));
  }
}
BENCHMARK(BM_LogProb);

void BM_SampleBatch(benchmark::State& state) {
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const PolicyParams params = PolicyParams::defaults();
  const ProblemBank bank =
      make_bank({8, 8, 8, 8, 0}, 0);  // 32 problems, one training batch
  RngStream presample_rng(2);
  const RefRewardTable table =
      presample_ref_rewards(params, bank, profile, 16, presample_rng);
  TrainConfig cfg;
  RngStream rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_batch(params, bank.problems(), profile, table, cfg, rng));
  }
}
BENCHMARK(BM_SampleBatch);

void BM_SurrogateLossAndGrad(benchmark::State& state) {
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const PolicyParams params = PolicyParams::defaults();
  const ProblemBank bank = make_bank({8, 8, 8, 8, 0}, 0);
  RngStream presample_rng(2);
  const RefRewardTable table =
      presample_ref_rewards(params, bank, profile, 16, presample_rng);
  TrainConfig cfg;
  RngStream rng(3);
  const auto batch =
      sample_batch(params, bank.problems(), profile, table, cfg, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        surrogate_loss_and_grad(params, batch, cfg.epsilon));
  }
}
BENCHMARK(BM_SurrogateLossAndGrad);

void BM_Evaluate(benchmark::State& state) {
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const PolicyParams params = PolicyParams::defaults();
  const ProblemBank bank = make_bank({50, 50, 50, 50, 50}, 0);
  RngStream rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(params, bank, profile, 16, rng));
  }
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
