// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "risnc/channel.hpp"
#include "risnc/config.hpp"
#include "risnc/simulation.hpp"

namespace {

risnc::Config bench_config() {
  risnc::Config cfg;
  cfg.horizon = 10;
  cfg.elements = 4;
  cfg.channel.moment_samples = 4000;
  cfg.channel.gamma_samples = 4000;
  cfg.channel.outage_samples = 500;
  cfg.experiment.resample_scenario = false;
  return cfg;
}

void BM_MomentsSerial(benchmark::State& state) {
  const risnc::Scenario s = risnc::generate_scenario(bench_config(), 7);
  for (auto _ : state) {
    risnc::RandomStream rng(11);
    benchmark::DoNotOptimize(risnc::estimate_moments_serial(s.channel, state.range(0), rng));
  }
}

void BM_MomentsParallel(benchmark::State& state) {
  const risnc::Scenario s = risnc::generate_scenario(bench_config(), 7);
  for (auto _ : state) {
    risnc::RandomStream rng(11);
    benchmark::DoNotOptimize(risnc::estimate_moments(s.channel, state.range(0), rng));
  }
}

void BM_ExperimentSerial(benchmark::State& state) {
  const risnc::Scenario s = risnc::generate_scenario(bench_config(), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(risnc::run_experiment_serial(
        s, {risnc::Policy::kSdpLookahead, risnc::Policy::kRandomPhase},
        static_cast<int>(state.range(0)), 3));
  }
}

void BM_ExperimentParallel(benchmark::State& state) {
  const risnc::Scenario s = risnc::generate_scenario(bench_config(), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(risnc::run_experiment(
        s, {risnc::Policy::kSdpLookahead, risnc::Policy::kRandomPhase},
        static_cast<int>(state.range(0)), 3));
  }
}

}  // namespace

BENCHMARK(BM_MomentsSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentsParallel)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
