#include "kernsat/render.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "kernsat/train.hpp"

namespace kernsat {
namespace {

void write_pnm(const std::filesystem::path& path, const char* format, int width, int height,
               std::span<const uint8_t> pixels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << format << "\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) {
        throw std::runtime_error("failed to write " + path.string());
    }
}

struct GridLayout {
    int cols = 0, rows = 0;
    int canvas_w = 0, canvas_h = 0;
};

GridLayout grid_for(int tiles, int tile_w, int tile_h) {
    GridLayout g;
    g.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tiles))));
    g.rows = (tiles + g.cols - 1) / g.cols;
    g.canvas_w = g.cols * tile_w + (g.cols - 1);
    g.canvas_h = g.rows * tile_h + (g.rows - 1);
    return g;
}

// Min-max normalization to a byte; zero range maps everything to 128.
uint8_t to_byte(float v, float lo, float hi) {
    if (hi <= lo) return 128;
    const double scaled = (static_cast<double>(v) - lo) / (static_cast<double>(hi) - lo) * 255.0;
    return static_cast<uint8_t>(std::lround(scaled));
}

}  // namespace

void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> gray) {
    if (gray.size() != static_cast<size_t>(width) * height) {
        throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
    }
    write_pnm(path, "P5", width, height, gray);
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> rgb_interleaved) {
    if (rgb_interleaved.size() != static_cast<size_t>(width) * height * 3) {
        throw std::invalid_argument("write_ppm: pixel count does not match dimensions");
    }
    write_pnm(path, "P6", width, height, rgb_interleaved);
}

void render_kernel_grid(const KernelSnapshot& snapshot, const std::filesystem::path& path) {
    if (snapshot.kernel < 1 || snapshot.out_channels < 1) {
        throw std::invalid_argument("render_kernel_grid: degenerate snapshot");
    }
    const int k = snapshot.kernel;
    const GridLayout grid = grid_for(snapshot.out_channels, k, k);
    const bool gray = snapshot.in_channels == 1;
    const int components = gray ? 1 : 3;
    std::vector<uint8_t> canvas(
        static_cast<size_t>(grid.canvas_w) * grid.canvas_h * components, 0);

    const size_t kernel_stride = static_cast<size_t>(snapshot.in_channels) * k * k;
    for (int tile = 0; tile < snapshot.out_channels; ++tile) {
        const float* kernel = snapshot.weights.data() + static_cast<size_t>(tile) * kernel_stride;
        float lo = kernel[0], hi = kernel[0];
        for (size_t i = 1; i < kernel_stride; ++i) {
            lo = std::min(lo, kernel[i]);
            hi = std::max(hi, kernel[i]);
        }
        const int tx = (tile % grid.cols) * (k + 1);
        const int ty = (tile / grid.cols) * (k + 1);
        for (int y = 0; y < k; ++y) {
            for (int x = 0; x < k; ++x) {
                uint8_t* px =
                    canvas.data() +
                    (static_cast<size_t>(ty + y) * grid.canvas_w + (tx + x)) * components;
                for (int comp = 0; comp < components; ++comp) {
                    if (comp < snapshot.in_channels) {
                        const float v = kernel[(static_cast<size_t>(comp) * k + y) * k + x];
                        px[comp] = to_byte(v, lo, hi);
                    } else {
                        px[comp] = 0;
                    }
                }
            }
        }
    }
    if (gray) {
        write_pgm(path, grid.canvas_w, grid.canvas_h, canvas);
    } else {
        write_ppm(path, grid.canvas_w, grid.canvas_h, canvas);
    }
}

void capture_activation_maps(const NetworkT<float>& net, const ImageF32& image,
                             const std::string& layer_selector,
                             const std::filesystem::path& path) {
    Tensor4 input(1, image.channels, image.height, image.width);
    input.data = image.data;

    NetworkCacheT<float> cache;
    network_forward(net, input, &cache);

    const Tensor4* selected = nullptr;
    if (layer_selector == "stem") {
        selected = &cache.stem_act;
    } else if (layer_selector == "final") {
        selected = cache.block_outputs.empty() ? &cache.stem_act : &cache.block_outputs.back();
    } else if (layer_selector.rfind("block", 0) == 0) {
        const std::string digits = layer_selector.substr(5);
        if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
            const size_t index = std::stoul(digits);
            if (index >= 1 && index <= cache.block_outputs.size()) {
                selected = &cache.block_outputs[index - 1];
            }
        }
    }
    if (!selected) {
        throw std::invalid_argument("invalid layer selector '" + layer_selector +
                                    "' (expected stem, block<1.." +
                                    std::to_string(net.blocks.size()) + ">, or final)");
    }

    const int h = selected->h;
    const int w = selected->w;
    const GridLayout grid = grid_for(selected->c, w, h);
    std::vector<uint8_t> canvas(static_cast<size_t>(grid.canvas_w) * grid.canvas_h, 0);
    for (int channel = 0; channel < selected->c; ++channel) {
        const float* plane = selected->plane(0, channel);
        float lo = plane[0], hi = plane[0];
        for (int i = 1; i < h * w; ++i) {
            lo = std::min(lo, plane[i]);
            hi = std::max(hi, plane[i]);
        }
        const int tx = (channel % grid.cols) * (w + 1);
        const int ty = (channel / grid.cols) * (h + 1);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                canvas[static_cast<size_t>(ty + y) * grid.canvas_w + (tx + x)] =
                    to_byte(plane[y * w + x], lo, hi);
            }
        }
    }
    write_pgm(path, grid.canvas_w, grid.canvas_h, canvas);
}

}  // namespace kernsat
