#include <random>

#include "benchmark/benchmark.h"
#include "kernsat/metrics.hpp"
#include "kernsat/rng.hpp"

using namespace kernsat;

namespace {

LabeledDataset random_set(size_t count, int side, uint64_t seed) {
    std::mt19937_64 gen(seed);
    LabeledDataset dataset;
    dataset.num_classes = 10;
    for (size_t i = 0; i < count; ++i) {
        ImageU8 image(3, side, side);
        for (uint8_t& v : image.data) v = static_cast<uint8_t>(rng::bounded(gen, 256));
        dataset.push_back(std::move(image), static_cast<int32_t>(i % 10));
    }
    return dataset;
}

void BM_DatasetMe(benchmark::State& state) {
    const LabeledDataset dataset = random_set(static_cast<size_t>(state.range(0)), 32, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dataset_me(dataset));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DatasetMe)->Arg(256)->Arg(1024);

void BM_DatasetSnrPerImage(benchmark::State& state) {
    const LabeledDataset dataset = random_set(static_cast<size_t>(state.range(0)), 32, 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dataset_snr(dataset, Pooling::PerImageMean));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DatasetSnrPerImage)->Arg(256)->Arg(1024);

void BM_MetricsReport(benchmark::State& state) {
    const LabeledDataset dataset = random_set(512, 32, 17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics_report(dataset, Pooling::GlobalFlatten));
    }
    state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_MetricsReport);

}  // namespace
