// BatchRunner: serial reference against the OpenMP path on a fixed batch of
// havoc mutants of the mini-JS seeds.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "gramfuzz/campaign.hpp"
#include "gramfuzz/mutate.hpp"

using namespace gramfuzz;

namespace {

const std::vector<Bytes>& batch() {
  static std::vector<Bytes> inputs = [] {
    auto seeds = load_seed_dirs({std::filesystem::path(GRAMFUZZ_SOURCE_DIR) / "fixtures/minijs/seeds"});
    Rng rng(1);
    std::vector<Bytes> out;
    for (const auto& s : seeds)
      for (auto& m : havoc(s, rng, 512).mutants) out.push_back(std::move(m));
    return out;
  }();
  return inputs;
}

TargetSpec spec(Isolation iso) {
  auto t = *builtin_target("minijs");
  t.isolation = iso;
  return t;
}

void set_counters(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch().size()));
}

void BM_serial(benchmark::State& state) {
  BatchRunner runner(spec(static_cast<Isolation>(state.range(0))), 1);
  for (auto _ : state) benchmark::DoNotOptimize(runner.run_serial(batch()));
  set_counters(state);
}

void BM_parallel(benchmark::State& state) {
  BatchRunner runner(spec(static_cast<Isolation>(state.range(0))), static_cast<unsigned>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(runner.run_parallel(batch()));
  set_counters(state);
}

}  // namespace

BENCHMARK(BM_serial)
    ->ArgNames({"isolation"})
    ->Arg(static_cast<int>(Isolation::direct))
    ->Arg(static_cast<int>(Isolation::fork_server))
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_parallel)
    ->ArgNames({"isolation", "workers"})
    ->ArgsProduct({{static_cast<int>(Isolation::direct), static_cast<int>(Isolation::fork_server)}, {2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
