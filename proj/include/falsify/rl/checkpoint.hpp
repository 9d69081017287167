#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "falsify/rl/policy.hpp"

namespace falsify {

// Policy checkpoint: "FPCK" magic, format version, then for each network the
// layer size list followed by row-major weights and biases as little-endian
// 64-bit floats.
inline constexpr uint32_t kCheckpointMagic = 0x4650434B;  // "FPCK"
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& os, double v) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

inline void write_mlp(std::ostream& os, const Mlp& net) {
    write_u32(os, static_cast<uint32_t>(net.sizes().size()));
    for (int s : net.sizes()) write_u32(os, static_cast<uint32_t>(s));
    for (const auto& l : net.layers()) {
        for (double v : l.w) write_f64(os, v);
        for (double v : l.b) write_f64(os, v);
    }
}

inline Mlp read_mlp(std::istream& is) {
    uint32_t ns = read_u32(is);
    std::vector<int> sizes(ns);
    for (auto& s : sizes) s = static_cast<int>(read_u32(is));
    Mlp net(sizes);
    for (auto& l : net.layers()) {
        for (double& v : l.w) v = read_f64(is);
        for (double& v : l.b) v = read_f64(is);
    }
    return net;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const PolicyParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    detail::write_u32(os, kCheckpointMagic);
    detail::write_u32(os, kCheckpointVersion);
    detail::write_mlp(os, params.actor);
    detail::write_mlp(os, params.critic);
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    if (detail::read_u32(is) != kCheckpointMagic) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    }
    uint32_t version = detail::read_u32(is);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("load_checkpoint: unsupported version in " + path);
    }
    PolicyParams p;
    p.actor = detail::read_mlp(is);
    p.critic = detail::read_mlp(is);
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return p;
}

}  // namespace falsify
