#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernsat/conv.hpp"
#include "kernsat/layers.hpp"
#include "kernsat/rng.hpp"
#include "kernsat/tensor.hpp"

namespace kernsat {

// conv(3x3, stride s) -> ReLU -> conv(3x3) plus a skip path. The skip is the
// identity when shapes agree, otherwise a 1x1 projection with the same
// stride. There is no activation after the add, so a block whose main-path
// weights are all zero is an exact identity map.
template <typename T>
struct ResidualBlockT {
    ConvLayerT<T> conv1;
    ConvLayerT<T> conv2;
    std::optional<ConvLayerT<T>> projection;

    bool has_projection() const { return projection.has_value(); }
};

// Stem 3x3 conv -> ReLU -> residual blocks -> global average pool -> dense.
// Built from a descriptor like "res-16-32-64": the first width is the stem
// and first block, later width changes come with a stride-2 transition.
template <typename T>
struct NetworkT {
    std::string descriptor;
    int in_channels = 0;
    int num_classes = 0;
    int input_height = 0;
    int input_width = 0;
    ConvLayerT<T> stem;
    std::vector<ResidualBlockT<T>> blocks;
    DenseLayerT<T> head;

    size_t parameter_count() const {
        size_t total = 0;
        const_cast<NetworkT*>(this)->for_each_param(
            [&total](const std::string&, std::vector<T>& values) { total += values.size(); });
        return total;
    }

    // Visits every parameter vector in a fixed order:
    // stem.w, stem.b, then per block conv1.w/b, conv2.w/b, [proj.w/b], then
    // head.w, head.b. Optimizer state and checkpoints rely on this order.
    template <typename F>
    void for_each_param(F&& fn) {
        fn("stem.weights", stem.weights);
        fn("stem.bias", stem.bias);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const std::string prefix = "block" + std::to_string(b + 1);
            fn(prefix + ".conv1.weights", blocks[b].conv1.weights);
            fn(prefix + ".conv1.bias", blocks[b].conv1.bias);
            fn(prefix + ".conv2.weights", blocks[b].conv2.weights);
            fn(prefix + ".conv2.bias", blocks[b].conv2.bias);
            if (blocks[b].has_projection()) {
                fn(prefix + ".proj.weights", blocks[b].projection->weights);
                fn(prefix + ".proj.bias", blocks[b].projection->bias);
            }
        }
        fn("head.weights", head.weights);
        fn("head.bias", head.bias);
    }

    // Conv layers only, in forward order (kernel snapshots).
    template <typename F>
    void for_each_conv(F&& fn) const {
        fn(std::string("stem"), stem);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const std::string prefix = "block" + std::to_string(b + 1);
            fn(prefix + ".conv1", blocks[b].conv1);
            fn(prefix + ".conv2", blocks[b].conv2);
            if (blocks[b].has_projection()) {
                fn(prefix + ".proj", *blocks[b].projection);
            }
        }
    }
};

using Network = NetworkT<float>;

// ---------------------------------------------------------------------------
// Gradients, shaped like the network's parameters.
// ---------------------------------------------------------------------------

template <typename T>
struct WeightBiasGradT {
    std::vector<T> weights;
    std::vector<T> bias;
};

template <typename T>
struct NetworkGradsT {
    struct Block {
        WeightBiasGradT<T> conv1, conv2;
        std::optional<WeightBiasGradT<T>> projection;
    };
    WeightBiasGradT<T> stem;
    std::vector<Block> blocks;
    WeightBiasGradT<T> head;

    template <typename F>
    void for_each(F&& fn) {
        fn(stem.weights);
        fn(stem.bias);
        for (auto& block : blocks) {
            fn(block.conv1.weights);
            fn(block.conv1.bias);
            fn(block.conv2.weights);
            fn(block.conv2.bias);
            if (block.projection) {
                fn(block.projection->weights);
                fn(block.projection->bias);
            }
        }
        fn(head.weights);
        fn(head.bias);
    }

    void fill_zero() {
        for_each([](std::vector<T>& values) { std::fill(values.begin(), values.end(), T(0)); });
    }

    // this += scale * other, walking blocks in the fixed parameter order so
    // reductions are bit-reproducible.
    void accumulate_scaled(NetworkGradsT& other, T scale) {
        auto it = [&]() {
            std::vector<std::vector<T>*> list;
            other.for_each([&list](std::vector<T>& values) { list.push_back(&values); });
            return list;
        }();
        size_t idx = 0;
        for_each([&](std::vector<T>& values) {
            const std::vector<T>& src = *it[idx++];
            for (size_t i = 0; i < values.size(); ++i) values[i] += scale * src[i];
        });
    }
};

using NetworkGrads = NetworkGradsT<float>;

template <typename T>
NetworkGradsT<T> make_grads_like(const NetworkT<T>& net) {
    NetworkGradsT<T> grads;
    grads.stem.weights.assign(net.stem.weights.size(), T(0));
    grads.stem.bias.assign(net.stem.bias.size(), T(0));
    grads.blocks.resize(net.blocks.size());
    for (size_t b = 0; b < net.blocks.size(); ++b) {
        grads.blocks[b].conv1.weights.assign(net.blocks[b].conv1.weights.size(), T(0));
        grads.blocks[b].conv1.bias.assign(net.blocks[b].conv1.bias.size(), T(0));
        grads.blocks[b].conv2.weights.assign(net.blocks[b].conv2.weights.size(), T(0));
        grads.blocks[b].conv2.bias.assign(net.blocks[b].conv2.bias.size(), T(0));
        if (net.blocks[b].has_projection()) {
            grads.blocks[b].projection.emplace();
            grads.blocks[b].projection->weights.assign(net.blocks[b].projection->weights.size(),
                                                       T(0));
            grads.blocks[b].projection->bias.assign(net.blocks[b].projection->bias.size(), T(0));
        }
    }
    grads.head.weights.assign(net.head.weights.size(), T(0));
    grads.head.bias.assign(net.head.bias.size(), T(0));
    return grads;
}

// Pairs each parameter vector with its gradient vector, in the shared order.
template <typename T, typename F>
void for_each_param_with_grad(NetworkT<T>& net, NetworkGradsT<T>& grads, F&& fn) {
    std::vector<std::vector<T>*> grad_list;
    grads.for_each([&grad_list](std::vector<T>& values) { grad_list.push_back(&values); });
    size_t idx = 0;
    net.for_each_param([&](const std::string& name, std::vector<T>& params) {
        fn(name, params, *grad_list[idx++]);
    });
}

// ---------------------------------------------------------------------------
// Forward / backward with explicit caches.
// ---------------------------------------------------------------------------

template <typename T>
struct BlockCacheT {
    Tensor4T<T> input;
    Tensor4T<T> conv1_out;  // pre-activation
    Tensor4T<T> act1;
};

template <typename T>
struct NetworkCacheT {
    Tensor4T<T> input;
    Tensor4T<T> stem_out;  // pre-activation
    Tensor4T<T> stem_act;
    std::vector<BlockCacheT<T>> blocks;
    std::vector<Tensor4T<T>> block_outputs;
    Tensor4T<T> pooled;
    Tensor4T<T> logits;
};

template <typename T>
Tensor4T<T> residual_block_forward(const Tensor4T<T>& x, const ResidualBlockT<T>& block,
                                   BlockCacheT<T>* cache = nullptr) {
    Tensor4T<T> conv1_out = conv2d_forward(x, block.conv1);
    Tensor4T<T> act1 = relu_forward(conv1_out);
    Tensor4T<T> main_out = conv2d_forward(act1, block.conv2);
    Tensor4T<T> skip_out = block.has_projection() ? conv2d_forward(x, *block.projection) : x;
    require_same_shape(main_out, skip_out, "residual_block_forward");
    for (size_t i = 0; i < main_out.data.size(); ++i) main_out.data[i] += skip_out.data[i];
    if (cache) {
        cache->input = x;
        cache->conv1_out = std::move(conv1_out);
        cache->act1 = std::move(act1);
    }
    return main_out;
}

template <typename T>
Tensor4T<T> residual_block_backward(const Tensor4T<T>& grad_out, const ResidualBlockT<T>& block,
                                    const BlockCacheT<T>& cache,
                                    typename NetworkGradsT<T>::Block& grads) {
    ConvGradsT<T> conv2_grads = conv2d_backward(grad_out, cache.act1, block.conv2);
    grads.conv2.weights = std::move(conv2_grads.weights);
    grads.conv2.bias = std::move(conv2_grads.bias);

    Tensor4T<T> grad_act1 = relu_backward(conv2_grads.input, cache.conv1_out);
    ConvGradsT<T> conv1_grads = conv2d_backward(grad_act1, cache.input, block.conv1);
    grads.conv1.weights = std::move(conv1_grads.weights);
    grads.conv1.bias = std::move(conv1_grads.bias);

    Tensor4T<T> grad_x = std::move(conv1_grads.input);
    if (block.has_projection()) {
        ConvGradsT<T> proj_grads = conv2d_backward(grad_out, cache.input, *block.projection);
        grads.projection.emplace();
        grads.projection->weights = std::move(proj_grads.weights);
        grads.projection->bias = std::move(proj_grads.bias);
        for (size_t i = 0; i < grad_x.data.size(); ++i) {
            grad_x.data[i] += proj_grads.input.data[i];
        }
    } else {
        // Identity skip: its gradient w.r.t. x is the identity.
        for (size_t i = 0; i < grad_x.data.size(); ++i) {
            grad_x.data[i] += grad_out.data[i];
        }
    }
    return grad_x;
}

template <typename T>
Tensor4T<T> network_forward(const NetworkT<T>& net, const Tensor4T<T>& x,
                            NetworkCacheT<T>* cache = nullptr) {
    Tensor4T<T> stem_out = conv2d_forward(x, net.stem);
    Tensor4T<T> current = relu_forward(stem_out);
    if (cache) {
        cache->input = x;
        cache->stem_out = std::move(stem_out);
        cache->stem_act = current;
        cache->blocks.resize(net.blocks.size());
        cache->block_outputs.resize(net.blocks.size());
    }
    for (size_t b = 0; b < net.blocks.size(); ++b) {
        current = residual_block_forward(current, net.blocks[b], cache ? &cache->blocks[b] : nullptr);
        if (cache) cache->block_outputs[b] = current;
    }
    Tensor4T<T> pooled = global_avg_pool_forward(current);
    Tensor4T<T> logits = dense_forward(pooled, net.head);
    if (cache) {
        cache->pooled = std::move(pooled);
        cache->logits = logits;
    }
    return logits;
}

// Returns the gradient w.r.t. the network input; parameter gradients land in
// `grads` (overwritten, not accumulated).
template <typename T>
Tensor4T<T> network_backward(const NetworkT<T>& net, const NetworkCacheT<T>& cache,
                             const Tensor4T<T>& grad_logits, NetworkGradsT<T>& grads) {
    DenseGradsT<T> head_grads = dense_backward(grad_logits, cache.pooled, net.head);
    grads.head.weights = std::move(head_grads.weights);
    grads.head.bias = std::move(head_grads.bias);

    const Tensor4T<T>& last =
        net.blocks.empty() ? cache.stem_act : cache.block_outputs[net.blocks.size() - 1];
    Tensor4T<T> grad_current = global_avg_pool_backward(head_grads.input, last.h, last.w);

    if (grads.blocks.size() != net.blocks.size()) grads.blocks.resize(net.blocks.size());
    for (size_t b = net.blocks.size(); b-- > 0;) {
        grad_current =
            residual_block_backward(grad_current, net.blocks[b], cache.blocks[b], grads.blocks[b]);
    }

    Tensor4T<T> grad_stem_act = relu_backward(grad_current, cache.stem_out);
    ConvGradsT<T> stem_grads = conv2d_backward(grad_stem_act, cache.input, net.stem);
    grads.stem.weights = std::move(stem_grads.weights);
    grads.stem.bias = std::move(stem_grads.bias);
    return std::move(stem_grads.input);
}

// ---------------------------------------------------------------------------
// Construction.
// ---------------------------------------------------------------------------

// Parses "res-<w1>-<w2>-..." into block widths. Throws on anything else.
std::vector<int> parse_descriptor(const std::string& descriptor);

// Fan-in-scaled uniform init (bound sqrt(6/fan_in)) from the seeded
// generator; biases start at zero. Throws if any feature map would shrink
// below 1x1 for the given input size.
template <typename T>
NetworkT<T> build_network(const std::string& descriptor, int in_channels, int height, int width,
                          int num_classes, uint64_t seed) {
    const std::vector<int> widths = parse_descriptor(descriptor);
    if (in_channels < 1 || num_classes < 1 || height < 1 || width < 1) {
        throw std::invalid_argument("build_network: invalid input geometry");
    }

    NetworkT<T> net;
    net.descriptor = descriptor;
    net.in_channels = in_channels;
    net.num_classes = num_classes;
    net.input_height = height;
    net.input_width = width;

    net.stem = make_conv_layer<T>(in_channels, widths[0], 3, 1, 1);
    int ch = widths[0];
    int size_h = height, size_w = width;
    for (size_t b = 0; b < widths.size(); ++b) {
        const int out_ch = widths[b];
        const int stride = (b == 0) ? 1 : 2;
        ResidualBlockT<T> block;
        block.conv1 = make_conv_layer<T>(ch, out_ch, 3, stride, 1);
        block.conv2 = make_conv_layer<T>(out_ch, out_ch, 3, 1, 1);
        if (stride != 1 || ch != out_ch) {
            block.projection = make_conv_layer<T>(ch, out_ch, 1, stride, 0);
        }
        size_h = block.conv1.out_size(size_h);
        size_w = block.conv1.out_size(size_w);
        if (size_h < 1 || size_w < 1) {
            throw std::invalid_argument("build_network: input " + std::to_string(height) + "x" +
                                        std::to_string(width) + " too small for " + descriptor);
        }
        net.blocks.push_back(std::move(block));
        ch = out_ch;
    }
    net.head = make_dense_layer<T>(ch, num_classes);

    std::mt19937_64 gen(seed);
    auto init_uniform = [&gen](std::vector<T>& values, int fan_in) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (T& v : values) {
            v = static_cast<T>(rng::uniform_double(gen, -bound, bound));
        }
    };
    auto init_conv = [&init_uniform](ConvLayerT<T>& conv) {
        init_uniform(conv.weights, conv.in_channels * conv.kernel * conv.kernel);
    };
    init_conv(net.stem);
    for (ResidualBlockT<T>& block : net.blocks) {
        init_conv(block.conv1);
        init_conv(block.conv2);
        if (block.projection) init_conv(*block.projection);
    }
    init_uniform(net.head.weights, net.head.in_features);
    return net;
}

}  // namespace kernsat
