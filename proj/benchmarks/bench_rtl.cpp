#include <benchmark/benchmark.h>

#include <algorithm>

#include "quakecast/rng.hpp"
#include "quakecast/rtl.hpp"

using namespace quakecast;

namespace {

Catalog random_catalog(int events, int days) {
    Rng rng(9);
    Catalog catalog;
    for (int e = 0; e < events; ++e) {
        catalog.events.push_back(Event{static_cast<std::int64_t>(rng.uniform_index(days)) * 86400,
                                       rng.uniform(29.8, 31.6), rng.uniform(129.8, 131.8), rng.uniform(2.0, 6.5),
                                       std::nullopt});
    }
    std::sort(catalog.events.begin(), catalog.events.end(),
              [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
    return catalog;
}

GridSpec bench_grid() {
    GridSpec grid;
    grid.origin_lat = 30.0;
    grid.origin_lon = 130.0;
    grid.cell_km = 10.0;
    grid.n_rows = 16;
    grid.n_cols = 16;
    grid.ref_lat = 30.7;
    return grid;
}

void RtlGridNaive(benchmark::State& state) {
    Catalog catalog = random_catalog(static_cast<int>(state.range(0)), 1000);
    GridSpec grid = bench_grid();
    RtlParams params;
    std::vector<std::int64_t> days{900};
    for (auto _ : state) {
        RtlFeatureMap map = rtl_grid_naive(catalog, grid, days, params);
        benchmark::DoNotOptimize(map.values.data());
    }
}
BENCHMARK(RtlGridNaive)->Arg(1000)->Arg(10000);

void RtlGridWindowed(benchmark::State& state) {
    Catalog catalog = random_catalog(static_cast<int>(state.range(0)), 1000);
    GridSpec grid = bench_grid();
    RtlParams params;
    std::vector<std::int64_t> days{900};
    for (auto _ : state) {
        RtlFeatureMap map = rtl_grid(catalog, grid, days, params);
        benchmark::DoNotOptimize(map.values.data());
    }
}
BENCHMARK(RtlGridWindowed)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
