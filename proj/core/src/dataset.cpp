#include "kernsat/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernsat/rng.hpp"

namespace kernsat {

void LabeledDataset::push_back(ImageU8 image, int32_t label, Provenance origin) {
    images.push_back(std::move(image));
    labels.push_back(label);
    provenance.push_back(origin);
}

void LabeledDataset::validate() const {
    if (images.size() != labels.size() || images.size() != provenance.size()) {
        throw std::invalid_argument("LabeledDataset: images/labels/provenance length mismatch");
    }
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw std::invalid_argument("LabeledDataset: label " + std::to_string(labels[i]) +
                                        " at index " + std::to_string(i) + " out of range for " +
                                        std::to_string(num_classes) + " classes");
        }
    }
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, const SplitSpec& spec) {
    if (dataset.empty()) {
        throw std::invalid_argument("split: empty dataset");
    }
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    }

    std::mt19937_64 gen(spec.seed);
    const std::vector<size_t> order = rng::permutation(dataset.size(), gen);

    const size_t n = dataset.size();
    size_t n_train = static_cast<size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    if (n_train == 0) n_train = 1;
    if (n_train >= n) n_train = n - 1;

    LabeledDataset train, val;
    train.num_classes = dataset.num_classes;
    val.num_classes = dataset.num_classes;
    for (size_t i = 0; i < n; ++i) {
        const size_t src = order[i];
        auto& half = (i < n_train) ? train : val;
        half.push_back(dataset.images[src], dataset.labels[src], dataset.provenance[src]);
    }
    return {std::move(train), std::move(val)};
}

BatchStream::BatchStream(const LabeledDataset& dataset, int batch_size, uint64_t seed, bool shuffle)
    : dataset_(&dataset), batch_size_(batch_size), shuffle_(shuffle) {
    if (batch_size < 1) {
        throw std::invalid_argument("BatchStream: batch_size must be >= 1");
    }
    reset(seed);
}

void BatchStream::reset(uint64_t seed) {
    order_.resize(dataset_->size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (shuffle_) {
        std::mt19937_64 gen(seed);
        rng::shuffle(order_, gen);
    }
    cursor_ = 0;
}

int BatchStream::batch_count() const {
    const size_t n = dataset_->size();
    return static_cast<int>((n + batch_size_ - 1) / batch_size_);
}

std::optional<MiniBatch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;

    const size_t end = std::min(cursor_ + static_cast<size_t>(batch_size_), order_.size());
    MiniBatch batch;
    batch.images.reserve(end - cursor_);
    batch.labels.reserve(end - cursor_);
    batch.indices.reserve(end - cursor_);
    for (size_t i = cursor_; i < end; ++i) {
        const size_t src = order_[i];
        batch.images.push_back(normalize(dataset_->images[src]));
        batch.labels.push_back(dataset_->labels[src]);
        batch.indices.push_back(src);
    }
    cursor_ = end;
    return batch;
}

}  // namespace kernsat
