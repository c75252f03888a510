#include <random>

#include "benchmark/benchmark.h"
#include "kernsat/augment.hpp"
#include "kernsat/rng.hpp"

using namespace kernsat;

namespace {

void BM_NegateImage(benchmark::State& state) {
    std::mt19937_64 gen(19);
    ImageU8 image(3, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    for (uint8_t& v : image.data) v = static_cast<uint8_t>(rng::bounded(gen, 256));
    for (auto _ : state) {
        benchmark::DoNotOptimize(negate_image(image));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(image.data.size()));
}
BENCHMARK(BM_NegateImage)->Arg(32)->Arg(96);

void BM_BuildSupplemented(benchmark::State& state) {
    std::mt19937_64 gen(23);
    LabeledDataset dataset;
    dataset.num_classes = 10;
    for (int i = 0; i < state.range(0); ++i) {
        ImageU8 image(3, 32, 32);
        for (uint8_t& v : image.data) v = static_cast<uint8_t>(rng::bounded(gen, 256));
        dataset.push_back(std::move(image), i % 10);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_training_set(dataset, AugmentationMode::Supplemented));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildSupplemented)->Arg(1024);

}  // namespace
