#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "kernsat/image.hpp"
#include "kernsat/network.hpp"
#include "kernsat/saturation.hpp"

namespace kernsat {

// Binary P5 / P6 writers. Byte-deterministic: identical inputs produce
// identical files.
void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> gray);
void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> rgb_interleaved);

// Tiles the snapshot's kernels row-major on a near-square grid with 1-pixel
// separators (value 0). Each kernel is min-max normalized to [0,255] across
// all of its channels; a zero range renders mid-gray 128. Single-input-
// channel layers produce PGM; otherwise PPM from the first three input
// channels (a missing third channel renders 0).
void render_kernel_grid(const KernelSnapshot& snapshot, const std::filesystem::path& path);

// Forward pass on one image, recording the selected layer's output, then
// tiles the channels like render_kernel_grid with each channel min-max
// normalized independently. Always PGM. Selectors: "stem" (post-activation
// stem), "block<i>" (1-based block output), "final" (last block output).
void capture_activation_maps(const NetworkT<float>& net, const ImageF32& image,
                             const std::string& layer_selector,
                             const std::filesystem::path& path);

}  // namespace kernsat
