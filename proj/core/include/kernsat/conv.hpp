#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kernsat/tensor.hpp"

namespace kernsat {

// 2D convolution layer (cross-correlation). Weights are laid out
// [out_channels][in_channels][k][k]; one bias per output channel.
template <typename T>
struct ConvLayerT {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int pad = 0;
    std::vector<T> weights;
    std::vector<T> bias;

    int out_size(int in_size) const { return (in_size + 2 * pad - kernel) / stride + 1; }

    size_t weight_count() const {
        return static_cast<size_t>(out_channels) * in_channels * kernel * kernel;
    }
    size_t weight_index(int oc, int ic, int ky, int kx) const {
        return ((static_cast<size_t>(oc) * in_channels + ic) * kernel + ky) * kernel + kx;
    }
};

using ConvLayer = ConvLayerT<float>;

template <typename T>
ConvLayerT<T> make_conv_layer(int in_channels, int out_channels, int kernel, int stride, int pad) {
    if (kernel < 1 || stride < 1 || pad < 0 || in_channels < 1 || out_channels < 1) {
        throw std::invalid_argument("make_conv_layer: invalid geometry");
    }
    ConvLayerT<T> layer;
    layer.in_channels = in_channels;
    layer.out_channels = out_channels;
    layer.kernel = kernel;
    layer.stride = stride;
    layer.pad = pad;
    layer.weights.assign(layer.weight_count(), T(0));
    layer.bias.assign(out_channels, T(0));
    return layer;
}

namespace detail {

// Smallest output index o >= 0 with o*stride + offset >= 0.
inline int conv_lo(int offset, int stride) {
    return offset >= 0 ? 0 : (-offset + stride - 1) / stride;
}

// One past the largest o < out with o*stride + offset <= limit - 1.
inline int conv_hi(int offset, int stride, int limit, int out) {
    const int numer = limit - 1 - offset;
    if (numer < 0) return 0;
    const int hi = numer / stride + 1;
    return hi < out ? hi : out;
}

template <typename T>
void check_conv_shapes(const Tensor4T<T>& x, const ConvLayerT<T>& layer, const char* where) {
    if (x.c != layer.in_channels) {
        throw std::invalid_argument(std::string(where) + ": input has " + std::to_string(x.c) +
                                    " channels, layer expects " +
                                    std::to_string(layer.in_channels));
    }
    if (layer.out_size(x.h) < 1 || layer.out_size(x.w) < 1) {
        throw std::invalid_argument(std::string(where) + ": output size < 1 for input " +
                                    x.shape_string());
    }
}

}  // namespace detail

template <typename T>
Tensor4T<T> conv2d_forward(const Tensor4T<T>& x, const ConvLayerT<T>& layer) {
    detail::check_conv_shapes(x, layer, "conv2d_forward");
    const int oh = layer.out_size(x.h);
    const int ow = layer.out_size(x.w);
    const int k = layer.kernel;
    const int stride = layer.stride;
    const int pad = layer.pad;

    Tensor4T<T> y(x.n, layer.out_channels, oh, ow);
    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < layer.out_channels; ++oc) {
            T* out_plane = y.plane(in, oc);
            const T b = layer.bias[oc];
            for (int i = 0; i < oh * ow; ++i) out_plane[i] = b;

            for (int ic = 0; ic < layer.in_channels; ++ic) {
                const T* in_plane = x.plane(in, ic);
                for (int ky = 0; ky < k; ++ky) {
                    const int oy_lo = detail::conv_lo(ky - pad, stride);
                    const int oy_hi = detail::conv_hi(ky - pad, stride, x.h, oh);
                    for (int kx = 0; kx < k; ++kx) {
                        const T weight = layer.weights[layer.weight_index(oc, ic, ky, kx)];
                        const int ox_lo = detail::conv_lo(kx - pad, stride);
                        const int ox_hi = detail::conv_hi(kx - pad, stride, x.w, ow);
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            const T* in_row = in_plane + static_cast<size_t>(iy) * x.w + (kx - pad);
                            T* out_row = out_plane + static_cast<size_t>(oy) * ow;
                            if (stride == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    out_row[ox] += weight * in_row[ox];
                                }
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    out_row[ox] += weight * in_row[static_cast<size_t>(ox) * stride];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
struct ConvGradsT {
    Tensor4T<T> input;
    std::vector<T> weights;
    std::vector<T> bias;
};

template <typename T>
ConvGradsT<T> conv2d_backward(const Tensor4T<T>& grad_out, const Tensor4T<T>& x,
                              const ConvLayerT<T>& layer) {
    detail::check_conv_shapes(x, layer, "conv2d_backward");
    const int oh = layer.out_size(x.h);
    const int ow = layer.out_size(x.w);
    if (grad_out.n != x.n || grad_out.c != layer.out_channels || grad_out.h != oh ||
        grad_out.w != ow) {
        throw std::invalid_argument("conv2d_backward: grad_out shape " + grad_out.shape_string() +
                                    " inconsistent with forward output");
    }
    const int k = layer.kernel;
    const int stride = layer.stride;
    const int pad = layer.pad;

    ConvGradsT<T> grads;
    grads.input = Tensor4T<T>(x.n, x.c, x.h, x.w);
    grads.weights.assign(layer.weight_count(), T(0));
    grads.bias.assign(layer.out_channels, T(0));

    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < layer.out_channels; ++oc) {
            const T* go_plane = grad_out.plane(in, oc);

            T bias_acc = T(0);
            for (int i = 0; i < oh * ow; ++i) bias_acc += go_plane[i];
            grads.bias[oc] += bias_acc;

            for (int ic = 0; ic < layer.in_channels; ++ic) {
                const T* in_plane = x.plane(in, ic);
                T* gx_plane = grads.input.plane(in, ic);
                for (int ky = 0; ky < k; ++ky) {
                    const int oy_lo = detail::conv_lo(ky - pad, stride);
                    const int oy_hi = detail::conv_hi(ky - pad, stride, x.h, oh);
                    for (int kx = 0; kx < k; ++kx) {
                        const size_t widx = layer.weight_index(oc, ic, ky, kx);
                        const T weight = layer.weights[widx];
                        const int ox_lo = detail::conv_lo(kx - pad, stride);
                        const int ox_hi = detail::conv_hi(kx - pad, stride, x.w, ow);
                        T w_acc = T(0);
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            const T* go_row = go_plane + static_cast<size_t>(oy) * ow;
                            const T* in_row = in_plane + static_cast<size_t>(iy) * x.w + (kx - pad);
                            T* gx_row = gx_plane + static_cast<size_t>(iy) * x.w + (kx - pad);
                            if (stride == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    w_acc += go_row[ox] * in_row[ox];
                                    gx_row[ox] += weight * go_row[ox];
                                }
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    const size_t ix = static_cast<size_t>(ox) * stride;
                                    w_acc += go_row[ox] * in_row[ix];
                                    gx_row[ix] += weight * go_row[ox];
                                }
                            }
                        }
                        grads.weights[widx] += w_acc;
                    }
                }
            }
        }
    }
    return grads;
}

}  // namespace kernsat
