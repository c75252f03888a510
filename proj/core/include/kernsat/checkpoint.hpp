#pragma once

#include <cstdint>
#include <filesystem>

#include "kernsat/network.hpp"

namespace kernsat {

// ---------------------------------------------------------------------------
// Checkpoint file, magic "KSNET001", little-endian:
//   magic(8) | descriptor string | epoch i32 | seed u64
//   | in_channels, num_classes, input_h, input_w (i32 each)
//   | block count u32 | per block: name string, f32 block (u64 count + data)
// Parameter blocks follow the network's fixed iteration order.
// ---------------------------------------------------------------------------

struct Checkpoint {
    NetworkT<float> network;
    int epoch = 0;
    uint64_t seed = 0;
};

void save_checkpoint(const NetworkT<float>& net, const std::filesystem::path& path, int epoch,
                     uint64_t seed);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kernsat
