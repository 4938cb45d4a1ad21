#ifndef SGQC_CHECKPOINT_HPP
#define SGQC_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "sgqc/network.hpp"

namespace sgqc {

// Checkpoint layout (all integers little-endian):
//   magic "MNCP" | u16 version | u8 variant code | u32 alpha | u64 seed |
//   u32 parameter count | per parameter:
//     u32 name length | name bytes | u32 rank | u32 extents... | f32 data...
// Parameter values are stored as 32-bit floats; the round trip is bit-exact
// for the float engine.
constexpr std::uint16_t kCheckpointVersion = 1;

namespace detail {

inline void put_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename U>
void put_le(std::ofstream& os, U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    put_bytes(os, buf, sizeof(U));
}

inline void put_f32(std::ofstream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le<std::uint32_t>(os, bits);
}

inline void get_bytes(std::ifstream& is, void* p, std::size_t n, const char* what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw IoError(std::string("corrupt checkpoint: truncated ") + what);
}

template <typename U>
U get_le(std::ifstream& is, const char* what) {
    unsigned char buf[sizeof(U)];
    get_bytes(is, buf, sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<U>(v);
}

inline float get_f32(std::ifstream& is, const char* what) {
    std::uint32_t bits = get_le<std::uint32_t>(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const Network<T>& net) {
    const NetworkSpec& spec = net.spec();
    if (!spec.is_standard())
        throw Error("only standard network topologies can be checkpointed");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write("MNCP", 4);
    detail::put_le<std::uint16_t>(os, kCheckpointVersion);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(variant_code(spec.variant)));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec.alpha));
    detail::put_le<std::uint64_t>(os, net.store().seed);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.store().count()));
    for (const auto& e : net.store().entries()) {
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
        detail::put_bytes(os, e.name.data(), e.name.size());
        const auto& shape = e.value->shape();
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
        for (int ext : shape) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ext));
        for (std::size_t i = 0; i < e.value->size(); ++i)
            detail::put_f32(os, static_cast<float>((*e.value)[i]));
    }
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

template <typename T = float>
Network<T> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    detail::get_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, "MNCP", 4) != 0)
        throw IoError("corrupt checkpoint: bad magic in " + path);
    const auto version = detail::get_le<std::uint16_t>(is, "version");
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    const char vcode = static_cast<char>(detail::get_le<std::uint8_t>(is, "variant"));
    const auto alpha = detail::get_le<std::uint32_t>(is, "alpha");
    const auto seed = detail::get_le<std::uint64_t>(is, "seed");
    const auto n_params = detail::get_le<std::uint32_t>(is, "parameter count");

    NetworkSpec spec = NetworkSpec::standard(variant_from_code(vcode), static_cast<int>(alpha));
    Network<T> net(spec, seed);
    if (n_params != net.store().count())
        throw IoError("corrupt checkpoint: expected " + std::to_string(net.store().count()) +
                      " parameters, file has " + std::to_string(n_params));
    for (std::uint32_t p = 0; p < n_params; ++p) {
        const auto name_len = detail::get_le<std::uint32_t>(is, "name length");
        std::string name(name_len, '\0');
        detail::get_bytes(is, name.data(), name_len, "name");
        const auto& e = net.store().entry(p);
        if (e.name != name)
            throw IoError("corrupt checkpoint: parameter '" + name + "' where '" + e.name +
                          "' was expected");
        const auto rank = detail::get_le<std::uint32_t>(is, "rank");
        Shape shape(rank);
        for (auto& ext : shape)
            ext = static_cast<int>(detail::get_le<std::uint32_t>(is, "extent"));
        if (shape != e.value->shape())
            throw IoError("corrupt checkpoint: parameter '" + name + "' has shape " +
                          shape_str(shape) + ", expected " + shape_str(e.value->shape()));
        for (std::size_t i = 0; i < e.value->size(); ++i)
            (*e.value)[i] = static_cast<T>(detail::get_f32(is, "data"));
    }
    return net;
}

}  // namespace sgqc

#endif
