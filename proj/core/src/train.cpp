#include "kernsat/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernsat/layers.hpp"
#include "kernsat/rng.hpp"

namespace kernsat {
namespace {

// Chunk count is a constant, not the thread count, so the reduction order
// (and therefore every float result) is independent of parallelism.
constexpr int kGradChunks = 8;

struct ChunkOutcome {
    NetworkGrads grads;
    double loss_sum = 0.0;  // summed over samples, not averaged
    int correct = 0;
    bool populated = false;
};

Tensor4 pack_range(std::span<const ImageF32> images, size_t lo, size_t hi) {
    const ImageF32& first = images[lo];
    Tensor4 out(static_cast<int>(hi - lo), first.channels, first.height, first.width);
    const size_t stride = first.data.size();
    for (size_t i = lo; i < hi; ++i) {
        if (images[i].data.size() != stride) {
            throw std::invalid_argument("pack_range: images differ in shape within a batch");
        }
        std::copy(images[i].data.begin(), images[i].data.end(),
                  out.data.begin() + (i - lo) * stride);
    }
    return out;
}

int argmax_row(const Tensor4& logits, int row) {
    const float* values = logits.plane(row, 0);
    int best = 0;
    for (int j = 1; j < logits.c; ++j) {
        if (values[j] > values[best]) best = j;
    }
    return best;
}

// Forward(+backward) over one chunk of a batch. Loss and gradients come back
// as sums over the chunk's samples.
ChunkOutcome process_chunk(const NetworkT<float>& net, std::span<const ImageF32> images,
                           std::span<const int32_t> labels, size_t lo, size_t hi,
                           bool with_grads) {
    ChunkOutcome outcome;
    outcome.populated = true;
    const Tensor4 input = pack_range(images, lo, hi);
    const int m = static_cast<int>(hi - lo);
    const std::span<const int32_t> chunk_labels = labels.subspan(lo, hi - lo);

    if (with_grads) {
        NetworkCacheT<float> cache;
        Tensor4 logits = network_forward(net, input, &cache);
        LossResultT<float> loss = softmax_cross_entropy<float>(logits, chunk_labels);
        outcome.loss_sum = static_cast<double>(loss.loss) * m;
        // softmax grads are mean-scaled over the chunk; rescale to sums so
        // chunks of different sizes combine exactly.
        for (float& g : loss.grad_logits.data) g *= static_cast<float>(m);
        outcome.grads = make_grads_like(net);
        network_backward(net, cache, loss.grad_logits, outcome.grads);
        for (int i = 0; i < m; ++i) {
            if (argmax_row(logits, i) == chunk_labels[i]) ++outcome.correct;
        }
    } else {
        Tensor4 logits = network_forward(net, input);
        LossResultT<float> loss = softmax_cross_entropy<float>(logits, chunk_labels);
        outcome.loss_sum = static_cast<double>(loss.loss) * m;
        for (int i = 0; i < m; ++i) {
            if (argmax_row(logits, i) == chunk_labels[i]) ++outcome.correct;
        }
    }
    return outcome;
}

// Runs the fixed chunk decomposition, in parallel when OpenMP is enabled,
// then reduces in chunk order.
std::vector<ChunkOutcome> run_chunks(const NetworkT<float>& net,
                                     std::span<const ImageF32> images,
                                     std::span<const int32_t> labels, bool with_grads) {
    const size_t n = images.size();
    std::vector<ChunkOutcome> outcomes(kGradChunks);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < kGradChunks; ++c) {
        const size_t lo = n * static_cast<size_t>(c) / kGradChunks;
        const size_t hi = n * (static_cast<size_t>(c) + 1) / kGradChunks;
        if (lo < hi) {
            outcomes[c] = process_chunk(net, images, labels, lo, hi, with_grads);
        }
    }
    return outcomes;
}

}  // namespace

Tensor4 to_tensor(std::span<const ImageF32> images) {
    if (images.empty()) {
        throw std::invalid_argument("to_tensor: no images");
    }
    return pack_range(images, 0, images.size());
}

std::pair<double, double> validation_metrics(const NetworkT<float>& net,
                                             const LabeledDataset& dataset) {
    if (dataset.empty()) {
        throw std::invalid_argument("validation_metrics: empty dataset");
    }
    BatchStream stream(dataset, 256, 0, /*shuffle=*/false);
    double loss_sum = 0.0;
    long long correct = 0;
    while (auto batch = stream.next()) {
        const auto outcomes = run_chunks(net, batch->images, batch->labels, /*with_grads=*/false);
        for (const ChunkOutcome& outcome : outcomes) {
            loss_sum += outcome.loss_sum;
            correct += outcome.correct;
        }
    }
    const double n = static_cast<double>(dataset.size());
    return {loss_sum / n, 100.0 * static_cast<double>(correct) / n};
}

double evaluate(const NetworkT<float>& net, const LabeledDataset& test_set) {
    if (test_set.empty()) {
        throw std::invalid_argument("evaluate: empty test set");
    }
    for (Provenance origin : test_set.provenance) {
        if (origin != Provenance::Original) {
            throw std::invalid_argument(
                "evaluate: test set contains negative images; evaluation must use the original "
                "test set");
        }
    }
    return validation_metrics(net, test_set).second;
}

std::vector<LossRecord> train(NetworkT<float>& net, const LabeledDataset& train_set,
                              const LabeledDataset& val_set, const TrainConfig& config) {
    if (config.epochs < 1) {
        throw std::invalid_argument("train: epochs must be >= 1");
    }
    if (config.batch_size < 1) {
        throw std::invalid_argument("train: batch_size must be >= 1");
    }
    if (train_set.empty() || val_set.empty()) {
        throw std::invalid_argument("train: empty training or validation set");
    }

    AdamHyper<float> hyper;
    hyper.learning_rate = config.learning_rate;
    AdamState adam = make_adam_state(net, hyper);
    NetworkGrads total = make_grads_like(net);

    BatchStream stream(train_set, config.batch_size, rng::derive_seed(config.seed, 1),
                       config.shuffle);
    std::vector<LossRecord> records;
    records.reserve(config.epochs);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        stream.reset(rng::derive_seed(config.seed, static_cast<uint64_t>(epoch)));
        double epoch_loss_sum = 0.0;
        int batch_index = 0;
        while (auto batch = stream.next()) {
            auto outcomes = run_chunks(net, batch->images, batch->labels, /*with_grads=*/true);
            total.fill_zero();
            double batch_loss_sum = 0.0;
            const float inv_batch = 1.0f / static_cast<float>(batch->size());
            for (ChunkOutcome& outcome : outcomes) {
                if (!outcome.populated) continue;
                batch_loss_sum += outcome.loss_sum;
                total.accumulate_scaled(outcome.grads, inv_batch);
            }
            const double batch_loss = batch_loss_sum / static_cast<double>(batch->size());
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            }
            adam_step(net, total, adam);
            epoch_loss_sum += batch_loss * static_cast<double>(batch->size());
            ++batch_index;
        }

        LossRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss_sum / static_cast<double>(train_set.size());
        const auto [val_loss, val_acc] = validation_metrics(net, val_set);
        record.val_loss = val_loss;
        record.val_accuracy = val_acc;
        records.push_back(record);
        if (config.epoch_hook) {
            config.epoch_hook(epoch, net, record);
        }
    }
    return records;
}

}  // namespace kernsat
