#include "kernsat/image.hpp"

#include <stdexcept>
#include <string>

namespace kernsat {

ImageU8::ImageU8(int channels_, int height_, int width_)
    : channels(channels_),
      height(height_),
      width(width_),
      data(static_cast<size_t>(channels_) * height_ * width_, 0) {}

ImageF32::ImageF32(int channels_, int height_, int width_)
    : channels(channels_),
      height(height_),
      width(width_),
      data(static_cast<size_t>(channels_) * height_ * width_, 0.0f) {}

void ImageU8::validate() const {
    const size_t expected = static_cast<size_t>(channels) * height * width;
    if (channels < 1 || height < 1 || width < 1) {
        throw std::invalid_argument("ImageU8: non-positive dimensions");
    }
    if (data.size() != expected) {
        throw std::invalid_argument("ImageU8: data length " + std::to_string(data.size()) +
                                    " does not match shape (" + std::to_string(channels) + "x" +
                                    std::to_string(height) + "x" + std::to_string(width) + ")");
    }
}

ImageF32 normalize(const ImageU8& image) {
    ImageF32 out;
    out.channels = image.channels;
    out.height = image.height;
    out.width = image.width;
    out.data.resize(image.data.size());
    for (size_t i = 0; i < image.data.size(); ++i) {
        out.data[i] = static_cast<float>(image.data[i]) * (1.0f / 255.0f);
    }
    return out;
}

uint64_t content_hash(const ImageU8& image) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](uint64_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    auto mix_u32 = [&](uint32_t v) {
        mix(v & 0xff);
        mix((v >> 8) & 0xff);
        mix((v >> 16) & 0xff);
        mix((v >> 24) & 0xff);
    };
    mix_u32(static_cast<uint32_t>(image.channels));
    mix_u32(static_cast<uint32_t>(image.height));
    mix_u32(static_cast<uint32_t>(image.width));
    for (uint8_t b : image.data) mix(b);
    return h;
}

}  // namespace kernsat
