#include <random>

#include "benchmark/benchmark.h"
#include "kernsat/adam.hpp"
#include "kernsat/network.hpp"
#include "kernsat/rng.hpp"

using namespace kernsat;

namespace {

Tensor4 random_input(int n, int c, int h, int w, uint64_t seed) {
    std::mt19937_64 gen(seed);
    Tensor4 x(n, c, h, w);
    for (float& v : x.data) v = rng::uniform_float(gen, 0.0f, 1.0f);
    return x;
}

void BM_Conv2dForward(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    auto layer = make_conv_layer<float>(width, width, 3, 1, 1);
    std::mt19937_64 gen(1);
    for (float& v : layer.weights) v = rng::uniform_float(gen, -0.1f, 0.1f);
    const Tensor4 x = random_input(8, width, 32, 32, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv2d_forward(x, layer));
    }
    state.SetItemsProcessed(state.iterations() * x.n);
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    auto layer = make_conv_layer<float>(width, width, 3, 1, 1);
    std::mt19937_64 gen(3);
    for (float& v : layer.weights) v = rng::uniform_float(gen, -0.1f, 0.1f);
    const Tensor4 x = random_input(8, width, 32, 32, 4);
    const Tensor4 grad = random_input(8, width, 32, 32, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv2d_backward(grad, x, layer));
    }
    state.SetItemsProcessed(state.iterations() * x.n);
}
BENCHMARK(BM_Conv2dBackward)->Arg(16)->Arg(32);

void BM_NetworkForward(benchmark::State& state) {
    const Network net = build_network<float>("res-16-32-64", 3, 32, 32, 10, 7);
    const Tensor4 x = random_input(static_cast<int>(state.range(0)), 3, 32, 32, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(network_forward(net, x));
    }
    state.SetItemsProcessed(state.iterations() * x.n);
}
BENCHMARK(BM_NetworkForward)->Arg(1)->Arg(16);

void BM_AdamStep(benchmark::State& state) {
    Network net = build_network<float>("res-16-32-64", 3, 32, 32, 10, 7);
    NetworkGrads grads = make_grads_like(net);
    grads.for_each([](std::vector<float>& values) {
        std::fill(values.begin(), values.end(), 1e-3f);
    });
    AdamState adam = make_adam_state(net);
    for (auto _ : state) {
        adam_step(net, grads, adam);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(net.parameter_count()));
}
BENCHMARK(BM_AdamStep);

}  // namespace
