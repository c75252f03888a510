#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kernsat {

// Dense NCHW tensor. Templated on the scalar so the training path runs in
// float while gradient checks instantiate double.
template <typename T>
struct Tensor4T {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4T() = default;
    Tensor4T(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t size() const { return data.size(); }

    size_t index(int in, int ic, int iy, int ix) const {
        return ((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix;
    }
    T at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }
    T& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }

    const T* plane(int in, int ic) const { return data.data() + index(in, ic, 0, 0); }
    T* plane(int in, int ic) { return data.data() + index(in, ic, 0, 0); }

    bool same_shape(const Tensor4T& other) const {
        return n == other.n && c == other.c && h == other.h && w == other.w;
    }

    std::string shape_string() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + ")";
    }

    bool all_finite() const {
        for (T v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }
};

using Tensor4 = Tensor4T<float>;

template <typename T>
void require_same_shape(const Tensor4T<T>& a, const Tensor4T<T>& b, const char* where) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_string() +
                                    " vs " + b.shape_string());
    }
}

}  // namespace kernsat
