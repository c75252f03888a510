#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernsat/network.hpp"

namespace kernsat {

template <typename T>
struct AdamHyper {
    T learning_rate = T(0.001);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T epsilon = T(1e-8);
};

// Per-parameter first/second moment accumulators, block-aligned with the
// network's fixed parameter order. step_count is the shared timestep t.
template <typename T>
struct AdamStateT {
    AdamHyper<T> hyper;
    long long step_count = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
};

using AdamState = AdamStateT<float>;

template <typename T>
AdamStateT<T> make_adam_state(NetworkT<T>& net, AdamHyper<T> hyper = {}) {
    AdamStateT<T> state;
    state.hyper = hyper;
    net.for_each_param([&state](const std::string&, std::vector<T>& values) {
        state.m.emplace_back(values.size(), T(0));
        state.v.emplace_back(values.size(), T(0));
    });
    return state;
}

// One bias-corrected update on a single parameter block. `step` is the
// already-incremented timestep (1 on the first call). Aborts on non-finite
// gradients, naming the block and element.
template <typename T>
void adam_update_block(std::span<T> params, std::span<const T> grads, std::span<T> m,
                       std::span<T> v, long long step, const AdamHyper<T>& hyper,
                       const std::string& block_name) {
    if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size()) {
        throw std::invalid_argument("adam_update_block: size mismatch in " + block_name);
    }
    const T bias1 = T(1) - std::pow(hyper.beta1, static_cast<T>(step));
    const T bias2 = T(1) - std::pow(hyper.beta2, static_cast<T>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        const T g = grads[i];
        if (!std::isfinite(static_cast<double>(g))) {
            throw std::runtime_error("adam_update_block: non-finite gradient in " + block_name +
                                     "[" + std::to_string(i) + "]");
        }
        m[i] = hyper.beta1 * m[i] + (T(1) - hyper.beta1) * g;
        v[i] = hyper.beta2 * v[i] + (T(1) - hyper.beta2) * g * g;
        const T m_hat = m[i] / bias1;
        const T v_hat = v[i] / bias2;
        params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
}

template <typename T>
void adam_step(NetworkT<T>& net, NetworkGradsT<T>& grads, AdamStateT<T>& state) {
    ++state.step_count;
    size_t idx = 0;
    for_each_param_with_grad(net, grads,
                             [&](const std::string& name, std::vector<T>& params,
                                 std::vector<T>& grad) {
                                 adam_update_block<T>(params, grad, state.m[idx], state.v[idx],
                                                      state.step_count, state.hyper, name);
                                 ++idx;
                             });
}

}  // namespace kernsat
