#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "kernsat/image.hpp"

namespace kernsat {

// Whether an image came from the source dataset or was produced by negation.
// Evaluation asserts on this: test images must all be Original.
enum class Provenance : uint8_t { Original, Negative };

struct LabeledDataset {
    std::vector<ImageU8> images;
    std::vector<int32_t> labels;
    std::vector<Provenance> provenance;
    int num_classes = 0;

    size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }

    void push_back(ImageU8 image, int32_t label, Provenance origin = Provenance::Original);

    // Invariants: images/labels/provenance same length, every label < num_classes.
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.8;
    uint64_t seed = 0;
};

// Deterministic shuffle under spec.seed, then |train| = round(train_fraction * n).
// The two halves partition the input multiset.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, const SplitSpec& spec);

struct MiniBatch {
    std::vector<ImageF32> images;
    std::vector<int32_t> labels;
    std::vector<size_t> indices;  // positions in the source dataset

    size_t size() const { return images.size(); }
};

// ---------------------------------------------------------------------------
// One epoch of normalized batches. Every image appears exactly once; the
// final partial batch is emitted. With shuffle off, dataset order is kept.
// Batch order is fully determined by (seed, batch_size); reset(seed) rewinds
// for the next epoch with a new derived seed.
// ---------------------------------------------------------------------------
class BatchStream {
public:
    BatchStream(const LabeledDataset& dataset, int batch_size, uint64_t seed, bool shuffle);

    std::optional<MiniBatch> next();
    void reset(uint64_t seed);

    int batch_count() const;
    int batch_size() const { return batch_size_; }

private:
    const LabeledDataset* dataset_;
    int batch_size_;
    bool shuffle_;
    std::vector<size_t> order_;
    size_t cursor_ = 0;
};

}  // namespace kernsat
