#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kernsat::binio {

// Primitives of the checkpoint/snapshot block format. Everything is
// little-endian on disk regardless of host byte order.

inline void write_u32(std::ostream& out, uint32_t v) {
    const uint8_t bytes[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                              static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline void write_u64(std::ostream& out, uint64_t v) {
    write_u32(out, static_cast<uint32_t>(v));
    write_u32(out, static_cast<uint32_t>(v >> 32));
}

inline void write_i32(std::ostream& out, int32_t v) { write_u32(out, static_cast<uint32_t>(v)); }

inline void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<uint32_t>(v)); }

inline void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_f32_block(std::ostream& out, std::span<const float> values) {
    write_u64(out, values.size());
    for (float v : values) write_f32(out, v);
}

inline uint32_t read_u32(std::istream& in) {
    uint8_t bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw std::runtime_error("binio: truncated stream while reading u32");
    return uint32_t(bytes[0]) | (uint32_t(bytes[1]) << 8) | (uint32_t(bytes[2]) << 16) |
           (uint32_t(bytes[3]) << 24);
}

inline uint64_t read_u64(std::istream& in) {
    const uint64_t lo = read_u32(in);
    const uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

inline int32_t read_i32(std::istream& in) { return static_cast<int32_t>(read_u32(in)); }

inline float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

inline std::string read_string(std::istream& in) {
    const uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("binio: truncated stream while reading string");
    return s;
}

inline std::vector<float> read_f32_block(std::istream& in) {
    const uint64_t count = read_u64(in);
    std::vector<float> values(count);
    for (uint64_t i = 0; i < count; ++i) values[i] = read_f32(in);
    return values;
}

inline void write_magic(std::ostream& out, const std::string& magic) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, const std::string& magic, const std::string& what) {
    std::string found(magic.size(), '\0');
    in.read(found.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || found != magic) {
        throw std::runtime_error("bad magic in " + what + " (expected \"" + magic + "\")");
    }
}

}  // namespace kernsat::binio
