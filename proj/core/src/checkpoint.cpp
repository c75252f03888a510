#include "kernsat/checkpoint.hpp"

#include <fstream>

#include "kernsat/binio.hpp"

namespace kernsat {

namespace {
const std::string kMagic = "KSNET001";
}

void save_checkpoint(const NetworkT<float>& net, const std::filesystem::path& path, int epoch,
                     uint64_t seed) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    binio::write_magic(out, kMagic);
    binio::write_string(out, net.descriptor);
    binio::write_i32(out, epoch);
    binio::write_u64(out, seed);
    binio::write_i32(out, net.in_channels);
    binio::write_i32(out, net.num_classes);
    binio::write_i32(out, net.input_height);
    binio::write_i32(out, net.input_width);

    uint32_t count = 0;
    const_cast<NetworkT<float>&>(net).for_each_param(
        [&count](const std::string&, std::vector<float>&) { ++count; });
    binio::write_u32(out, count);
    const_cast<NetworkT<float>&>(net).for_each_param(
        [&out](const std::string& name, std::vector<float>& values) {
            binio::write_string(out, name);
            binio::write_f32_block(out, values);
        });
    if (!out) {
        throw std::runtime_error("failed to write " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    binio::expect_magic(in, kMagic, path.string());
    const std::string descriptor = binio::read_string(in);
    Checkpoint checkpoint;
    checkpoint.epoch = binio::read_i32(in);
    checkpoint.seed = binio::read_u64(in);
    const int in_channels = binio::read_i32(in);
    const int num_classes = binio::read_i32(in);
    const int input_h = binio::read_i32(in);
    const int input_w = binio::read_i32(in);

    checkpoint.network =
        build_network<float>(descriptor, in_channels, input_h, input_w, num_classes, 0);

    const uint32_t count = binio::read_u32(in);
    uint32_t expected = 0;
    checkpoint.network.for_each_param(
        [&expected](const std::string&, std::vector<float>&) { ++expected; });
    if (count != expected) {
        throw std::runtime_error("checkpoint " + path.string() + " has " + std::to_string(count) +
                                 " parameter blocks, architecture needs " +
                                 std::to_string(expected));
    }
    checkpoint.network.for_each_param([&](const std::string& name, std::vector<float>& values) {
        const std::string stored_name = binio::read_string(in);
        std::vector<float> stored = binio::read_f32_block(in);
        if (stored_name != name || stored.size() != values.size()) {
            throw std::runtime_error("checkpoint block '" + stored_name + "' does not match '" +
                                     name + "' in " + path.string());
        }
        values = std::move(stored);
    });
    return checkpoint;
}

}  // namespace kernsat
