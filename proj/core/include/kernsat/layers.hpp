#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kernsat/tensor.hpp"

namespace kernsat {

template <typename T>
Tensor4T<T> relu_forward(const Tensor4T<T>& x) {
    Tensor4T<T> y = x;
    for (T& v : y.data) {
        if (v < T(0)) v = T(0);
    }
    return y;
}

// Multiplies by the 0/1 mask of the forward input (1 where x > 0).
template <typename T>
Tensor4T<T> relu_backward(const Tensor4T<T>& grad_y, const Tensor4T<T>& x) {
    require_same_shape(grad_y, x, "relu_backward");
    Tensor4T<T> grad_x = grad_y;
    for (size_t i = 0; i < x.data.size(); ++i) {
        if (x.data[i] <= T(0)) grad_x.data[i] = T(0);
    }
    return grad_x;
}

// (n, c, h, w) -> (n, c, 1, 1), each channel averaged over its plane.
template <typename T>
Tensor4T<T> global_avg_pool_forward(const Tensor4T<T>& x) {
    Tensor4T<T> y(x.n, x.c, 1, 1);
    const T inv = T(1) / static_cast<T>(x.h * x.w);
    for (int in = 0; in < x.n; ++in) {
        for (int ic = 0; ic < x.c; ++ic) {
            const T* plane = x.plane(in, ic);
            T acc = T(0);
            for (int i = 0; i < x.h * x.w; ++i) acc += plane[i];
            y.at(in, ic, 0, 0) = acc * inv;
        }
    }
    return y;
}

template <typename T>
Tensor4T<T> global_avg_pool_backward(const Tensor4T<T>& grad_pooled, int h, int w) {
    Tensor4T<T> grad_x(grad_pooled.n, grad_pooled.c, h, w);
    const T inv = T(1) / static_cast<T>(h * w);
    for (int in = 0; in < grad_pooled.n; ++in) {
        for (int ic = 0; ic < grad_pooled.c; ++ic) {
            const T g = grad_pooled.at(in, ic, 0, 0) * inv;
            T* plane = grad_x.plane(in, ic);
            for (int i = 0; i < h * w; ++i) plane[i] = g;
        }
    }
    return grad_x;
}

// Fully connected head. Weights [out_features][in_features].
template <typename T>
struct DenseLayerT {
    int in_features = 0;
    int out_features = 0;
    std::vector<T> weights;
    std::vector<T> bias;
};

using DenseLayer = DenseLayerT<float>;

template <typename T>
DenseLayerT<T> make_dense_layer(int in_features, int out_features) {
    if (in_features < 1 || out_features < 1) {
        throw std::invalid_argument("make_dense_layer: invalid geometry");
    }
    DenseLayerT<T> layer;
    layer.in_features = in_features;
    layer.out_features = out_features;
    layer.weights.assign(static_cast<size_t>(in_features) * out_features, T(0));
    layer.bias.assign(out_features, T(0));
    return layer;
}

// x is (n, in_features, 1, 1); returns (n, out_features, 1, 1).
template <typename T>
Tensor4T<T> dense_forward(const Tensor4T<T>& x, const DenseLayerT<T>& layer) {
    if (x.c != layer.in_features || x.h != 1 || x.w != 1) {
        throw std::invalid_argument("dense_forward: input " + x.shape_string() +
                                    " does not match in_features=" +
                                    std::to_string(layer.in_features));
    }
    Tensor4T<T> y(x.n, layer.out_features, 1, 1);
    for (int in = 0; in < x.n; ++in) {
        const T* xin = x.plane(in, 0);
        for (int o = 0; o < layer.out_features; ++o) {
            const T* wrow = layer.weights.data() + static_cast<size_t>(o) * layer.in_features;
            T acc = layer.bias[o];
            for (int i = 0; i < layer.in_features; ++i) acc += wrow[i] * xin[i];
            y.at(in, o, 0, 0) = acc;
        }
    }
    return y;
}

template <typename T>
struct DenseGradsT {
    Tensor4T<T> input;
    std::vector<T> weights;
    std::vector<T> bias;
};

template <typename T>
DenseGradsT<T> dense_backward(const Tensor4T<T>& grad_y, const Tensor4T<T>& x,
                              const DenseLayerT<T>& layer) {
    DenseGradsT<T> grads;
    grads.input = Tensor4T<T>(x.n, x.c, 1, 1);
    grads.weights.assign(layer.weights.size(), T(0));
    grads.bias.assign(layer.bias.size(), T(0));
    for (int in = 0; in < x.n; ++in) {
        const T* xin = x.plane(in, 0);
        T* gx = grads.input.plane(in, 0);
        for (int o = 0; o < layer.out_features; ++o) {
            const T g = grad_y.at(in, o, 0, 0);
            const T* wrow = layer.weights.data() + static_cast<size_t>(o) * layer.in_features;
            T* gwrow = grads.weights.data() + static_cast<size_t>(o) * layer.in_features;
            grads.bias[o] += g;
            for (int i = 0; i < layer.in_features; ++i) {
                gwrow[i] += g * xin[i];
                gx[i] += g * wrow[i];
            }
        }
    }
    return grads;
}

// Global average pool followed by the dense head: feature maps in, logits out.
template <typename T>
Tensor4T<T> pool_and_dense_forward(const Tensor4T<T>& x, const DenseLayerT<T>& layer,
                                   Tensor4T<T>* pooled_out = nullptr) {
    Tensor4T<T> pooled = global_avg_pool_forward(x);
    Tensor4T<T> logits = dense_forward(pooled, layer);
    if (pooled_out) *pooled_out = std::move(pooled);
    return logits;
}

template <typename T>
struct LossResultT {
    T loss = T(0);
    Tensor4T<T> grad_logits;
};

// Softmax probabilities per sample, rows of size num_classes.
template <typename T>
std::vector<T> softmax_rows(const Tensor4T<T>& logits) {
    std::vector<T> probs(static_cast<size_t>(logits.n) * logits.c);
    for (int in = 0; in < logits.n; ++in) {
        const T* row = logits.plane(in, 0);
        T max = row[0];
        for (int j = 1; j < logits.c; ++j) {
            if (row[j] > max) max = row[j];
        }
        T denom = T(0);
        T* out = probs.data() + static_cast<size_t>(in) * logits.c;
        for (int j = 0; j < logits.c; ++j) {
            out[j] = std::exp(row[j] - max);
            denom += out[j];
        }
        for (int j = 0; j < logits.c; ++j) out[j] /= denom;
    }
    return probs;
}

// Mean over the batch of -log softmax(correct class). The gradient is
// (softmax - onehot) / batch, so it sums to zero across classes per sample.
template <typename T>
LossResultT<T> softmax_cross_entropy(const Tensor4T<T>& logits, std::span<const int32_t> labels) {
    if (static_cast<size_t>(logits.n) != labels.size()) {
        throw std::invalid_argument("softmax_cross_entropy: batch size mismatch");
    }
    const int classes = logits.c;
    LossResultT<T> result;
    result.grad_logits = Tensor4T<T>(logits.n, classes, 1, 1);
    const T inv_batch = T(1) / static_cast<T>(logits.n);

    const std::vector<T> probs = softmax_rows(logits);
    T loss_acc = T(0);
    for (int in = 0; in < logits.n; ++in) {
        const int32_t label = labels[static_cast<size_t>(in)];
        if (label < 0 || label >= classes) {
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                        " out of range for " + std::to_string(classes) +
                                        " classes");
        }
        const T* p = probs.data() + static_cast<size_t>(in) * classes;
        // log(p_label) recomputed stably from the raw logits.
        const T* row = logits.plane(in, 0);
        T max = row[0];
        for (int j = 1; j < classes; ++j) {
            if (row[j] > max) max = row[j];
        }
        T denom = T(0);
        for (int j = 0; j < classes; ++j) denom += std::exp(row[j] - max);
        loss_acc += std::log(denom) - (row[label] - max);

        T* g = result.grad_logits.plane(in, 0);
        for (int j = 0; j < classes; ++j) g[j] = p[j] * inv_batch;
        g[label] -= inv_batch;
    }
    result.loss = loss_acc * inv_batch;
    return result;
}

}  // namespace kernsat
