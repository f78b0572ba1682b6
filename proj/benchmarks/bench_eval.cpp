#include <benchmark/benchmark.h>

#include "quakecast/eval.hpp"
#include "quakecast/rng.hpp"

using namespace quakecast;

namespace {

std::vector<ScoredSample> random_samples(int n, bool ties) {
    Rng rng(4);
    std::vector<ScoredSample> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double raw = rng.uniform();
        v.push_back({ties ? std::floor(raw * 100.0) / 100.0 : raw, rng.uniform() < 0.05 ? 1 : 0});
    }
    v[0].label = 1;
    v[1].label = 0;
    return v;
}

void RocAuc(benchmark::State& state) {
    auto v = random_samples(static_cast<int>(state.range(0)), state.range(1) != 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(roc_auc(v));
    }
}
BENCHMARK(RocAuc)->Args({100000, 0})->Args({100000, 1});

void PrAuc(benchmark::State& state) {
    auto v = random_samples(static_cast<int>(state.range(0)), state.range(1) != 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pr_auc(v));
    }
}
BENCHMARK(PrAuc)->Args({100000, 0})->Args({100000, 1});

}  // namespace

BENCHMARK_MAIN();
