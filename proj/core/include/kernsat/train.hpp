#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kernsat/adam.hpp"
#include "kernsat/dataset.hpp"
#include "kernsat/network.hpp"

namespace kernsat {

struct LossRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;  // percent
};

struct TrainConfig {
    int epochs = 1;
    int batch_size = 128;
    uint64_t seed = 0;
    float learning_rate = 0.001f;
    bool shuffle = true;
    // Invoked after every epoch with the updated network (kernel snapshots).
    std::function<void(int epoch, const NetworkT<float>&, const LossRecord&)> epoch_hook;
};

// Packs normalized images into one NCHW tensor. All images must share a shape.
Tensor4 to_tensor(std::span<const ImageF32> images);

// ADAM training with per-epoch deterministic shuffling derived from
// config.seed. Gradients over a batch are accumulated over a fixed number of
// sample chunks reduced in chunk order, so results are bit-identical for any
// thread count. Throws on non-finite loss, naming the epoch and batch.
std::vector<LossRecord> train(NetworkT<float>& net, const LabeledDataset& train_set,
                              const LabeledDataset& val_set, const TrainConfig& config);

// Percentage of argmax-correct predictions on the standard test set. The
// test set must be un-augmented: any Negative provenance flag is an error.
double evaluate(const NetworkT<float>& net, const LabeledDataset& test_set);

// Mean cross-entropy and accuracy without updating the network.
std::pair<double, double> validation_metrics(const NetworkT<float>& net,
                                             const LabeledDataset& dataset);

}  // namespace kernsat
