#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kernsat {

// ---------------------------------------------------------------------------
// Raw 8-bit image in channel-major, row-major layout:
//   data[c*height*width + y*width + x]
// channels is 1 for grayscale, 3 for RGB. All loaders convert into this
// layout so the rest of the code has a single indexing convention.
// ---------------------------------------------------------------------------
struct ImageU8 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    ImageU8() = default;
    ImageU8(int channels, int height, int width);

    size_t pixel_count() const { return data.size(); }
    size_t plane_size() const { return static_cast<size_t>(height) * width; }

    uint8_t at(int c, int y, int x) const {
        return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
    }
    uint8_t& at(int c, int y, int x) {
        return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
    }

    bool same_shape(const ImageU8& other) const {
        return channels == other.channels && height == other.height && width == other.width;
    }

    // Throws if data length does not match channels*height*width.
    void validate() const;
};

// Float image in [0, 1], same layout as ImageU8.
struct ImageF32 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    ImageF32() = default;
    ImageF32(int channels, int height, int width);

    size_t pixel_count() const { return data.size(); }
    size_t plane_size() const { return static_cast<size_t>(height) * width; }
};

// value / 255 into [0, 1]. No mean centering: keeping the raw scale means
// negation symmetry (v <-> 255-v) stays exact at the byte level.
ImageF32 normalize(const ImageU8& image);

// FNV-1a over shape and bytes. Used for identity and partition checks.
uint64_t content_hash(const ImageU8& image);

}  // namespace kernsat
