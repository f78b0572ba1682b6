#include <benchmark/benchmark.h>

#include "quakecast/nn.hpp"
#include "quakecast/rng.hpp"

using namespace quakecast;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

void ConvForward(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Rng rng(1);
    Tensor input = random_tensor({16, side, side}, rng);
    Tensor kernel = random_tensor({32, 16, 3, 3}, rng);
    Tensor bias = random_tensor({32}, rng);
    for (auto _ : state) {
        Tensor out = conv2d(input, kernel, bias);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(ConvForward)->RangeMultiplier(2)->Range(16, 64)->Complexity();

void ConvBackward(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Rng rng(2);
    Tensor input = random_tensor({16, side, side}, rng);
    Tensor kernel = random_tensor({32, 16, 3, 3}, rng);
    Tensor upstream = random_tensor({32, side, side}, rng);
    for (auto _ : state) {
        ConvGrads grads = conv2d_vjp(input, kernel, upstream);
        benchmark::DoNotOptimize(grads.input.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(ConvBackward)->RangeMultiplier(2)->Range(16, 64)->Complexity();

void LstmStep(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int embed = 16, hidden = 32;
    Rng rng(3);
    ConvLstmWeights weights{
        Parameter(random_tensor({hidden, embed + hidden, 3, 3}, rng)), Parameter(random_tensor({hidden}, rng)),
        Parameter(random_tensor({hidden, embed + hidden, 3, 3}, rng)), Parameter(random_tensor({hidden}, rng)),
        Parameter(random_tensor({hidden, embed + hidden, 3, 3}, rng)), Parameter(random_tensor({hidden}, rng)),
        Parameter(random_tensor({hidden, embed + hidden, 3, 3}, rng)), Parameter(random_tensor({hidden}, rng))};
    ConvLstmState s{random_tensor({hidden, side, side}, rng), random_tensor({hidden, side, side}, rng)};
    Tensor x = random_tensor({embed, side, side}, rng);
    for (auto _ : state) {
        ConvLstmState next = convlstm_step(x, s, weights);
        benchmark::DoNotOptimize(next.h.data());
    }
}
BENCHMARK(LstmStep)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
