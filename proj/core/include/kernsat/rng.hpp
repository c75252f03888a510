#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kernsat::rng {

// splitmix64, used to derive independent sub-seeds (run index, epoch index)
// from one master seed without correlated streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

// The std:: distributions are implementation-defined, so results would not
// reproduce across standard libraries. Everything below maps mt19937_64
// output (which is standardized) to the needed ranges by hand.

// Uniform in [0, 1), 53-bit resolution.
inline double uniform_double(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline float uniform_float(std::mt19937_64& gen) {
    return static_cast<float>(gen() >> 40) * 0x1.0p-24f;
}

// Uniform in [lo, hi).
inline double uniform_double(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(gen);
}

inline float uniform_float(std::mt19937_64& gen, float lo, float hi) {
    return lo + (hi - lo) * uniform_float(gen);
}

// Unbiased integer in [0, n) via rejection sampling.
inline uint64_t bounded(std::mt19937_64& gen, uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

// Fisher-Yates shuffle driven by bounded() so the permutation is identical
// on every platform for a given seed.
template <typename T>
void shuffle(std::vector<T>& values, std::mt19937_64& gen) {
    for (size_t i = values.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(bounded(gen, i));
        std::swap(values[i - 1], values[j]);
    }
}

inline std::vector<size_t> permutation(size_t n, std::mt19937_64& gen) {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order, gen);
    return order;
}

}  // namespace kernsat::rng
