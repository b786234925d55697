#ifndef SEMCOM_FRAMING_HPP
#define SEMCOM_FRAMING_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "semcom/common.hpp"
#include "semcom/symbols.hpp"

namespace semcom {

static_assert(std::endian::native == std::endian::little, "wire format requires a little-endian host");

// Normative wire layout, all integers little-endian, floats IEEE-754 single:
//
//   magic   2 bytes  0x53 0x43
//   version 1 byte   0x01
//   l       u16      total feature count
//   n       u16      kept feature count
//   d       u16      feature width (even)
//   scale   f32      power-normalization factor
//   bitmap  ceil(l/8) bytes, MSB-first, bit index = feature index,
//           trailing pad bits zero
//   payload n*d f32, consecutive pairs = one symbol's re/im
struct FramingError : Error {
    enum class Kind {
        bad_magic,
        bad_version,
        truncated,
        popcount_mismatch,
        pad_bits,
        capacity,
        invariant,
    };
    Kind kind;
    FramingError(Kind k, const std::string& msg) : Error("framing: " + msg), kind(k) {}
};

namespace wire {
inline constexpr std::uint8_t kMagic0 = 0x53;
inline constexpr std::uint8_t kMagic1 = 0x43;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderBytes = 13;  // magic+version+l+n+d+scale
inline constexpr double kSideChannelBitsPerSymbol = 2.0;

inline std::size_t bitmap_bytes(std::size_t l) { return (l + 7) / 8; }

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
}  // namespace wire

inline std::vector<std::uint8_t> serialize(const SymbolFrameF& frame) {
    const std::size_t l = frame.bitmap.size();
    const std::size_t n = static_cast<std::size_t>(frame.symbols.rows());
    const std::size_t d = static_cast<std::size_t>(frame.symbols.cols()) * 2;
    if (l > 65535 || d > 65535)
        throw FramingError(FramingError::Kind::capacity, "l or d exceeds 16-bit field capacity");
    if (n < 1) throw FramingError(FramingError::Kind::invariant, "frame must keep at least one feature");
    if (n > l) throw FramingError(FramingError::Kind::invariant, "n exceeds l");
    if (d % 2 != 0) throw FramingError(FramingError::Kind::invariant, "d must be even");
    if (!frame.has_scale) throw FramingError(FramingError::Kind::invariant, "frame has no scale metadata");
    if (popcount(frame.bitmap) != static_cast<int>(n))
        throw FramingError(FramingError::Kind::popcount_mismatch,
                           "popcount(bitmap) = " + std::to_string(popcount(frame.bitmap)) + " but n = " + std::to_string(n));

    std::vector<std::uint8_t> out;
    out.reserve(wire::kHeaderBytes + wire::bitmap_bytes(l) + n * d * 4);
    out.push_back(wire::kMagic0);
    out.push_back(wire::kMagic1);
    out.push_back(wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(l));
    wire::put_u16(out, static_cast<std::uint16_t>(n));
    wire::put_u16(out, static_cast<std::uint16_t>(d));
    std::uint8_t scale_bytes[4];
    std::memcpy(scale_bytes, &frame.scale, 4);
    out.insert(out.end(), scale_bytes, scale_bytes + 4);

    // bitmap, MSB-first within each byte
    out.resize(out.size() + wire::bitmap_bytes(l), 0);
    std::uint8_t* bm = out.data() + wire::kHeaderBytes;
    for (std::size_t i = 0; i < l; ++i)
        if (frame.bitmap[i]) bm[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));

    const std::size_t payload_off = out.size();
    out.resize(out.size() + n * d * 4);
    std::memcpy(out.data() + payload_off, frame.symbols.data(), n * d * 4);
    return out;
}

inline SymbolFrameF deserialize(const std::vector<std::uint8_t>& bytes) {
    auto need = [&](std::size_t want, const char* what) {
        if (bytes.size() < want)
            throw FramingError(FramingError::Kind::truncated, std::string("truncated ") + what + ": expected at least " +
                                                                  std::to_string(want) + " bytes, got " +
                                                                  std::to_string(bytes.size()));
    };
    need(wire::kHeaderBytes, "header");
    if (bytes[0] != wire::kMagic0 || bytes[1] != wire::kMagic1)
        throw FramingError(FramingError::Kind::bad_magic, "bad magic bytes");
    if (bytes[2] != wire::kVersion)
        throw FramingError(FramingError::Kind::bad_version, "unsupported version " + std::to_string(bytes[2]));
    const std::size_t l = wire::get_u16(bytes.data() + 3);
    const std::size_t n = wire::get_u16(bytes.data() + 5);
    const std::size_t d = wire::get_u16(bytes.data() + 7);
    float scale;
    std::memcpy(&scale, bytes.data() + 9, 4);

    if (n < 1) throw FramingError(FramingError::Kind::invariant, "header n = 0");
    if (n > l) throw FramingError(FramingError::Kind::invariant, "header n > l");
    if (d % 2 != 0 || d == 0) throw FramingError(FramingError::Kind::invariant, "header d not a positive even value");

    const std::size_t bm_bytes = wire::bitmap_bytes(l);
    const std::size_t total = wire::kHeaderBytes + bm_bytes + n * d * 4;
    if (bytes.size() != total)
        throw FramingError(FramingError::Kind::truncated, "expected " + std::to_string(total) + " bytes, got " +
                                                              std::to_string(bytes.size()));

    SymbolFrameF f;
    f.bitmap.assign(l, 0);
    const std::uint8_t* bm = bytes.data() + wire::kHeaderBytes;
    int pop = 0;
    for (std::size_t i = 0; i < l; ++i) {
        const bool bit = (bm[i / 8] >> (7 - i % 8)) & 1;
        f.bitmap[i] = bit ? 1 : 0;
        pop += bit;
    }
    // trailing pad bits must be zero
    if (l % 8 != 0) {
        const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xffu >> (l % 8));
        if (bm[bm_bytes - 1] & pad_mask)
            throw FramingError(FramingError::Kind::pad_bits, "nonzero bitmap pad bits");
    }
    if (pop != static_cast<int>(n))
        throw FramingError(FramingError::Kind::popcount_mismatch,
                           "popcount(bitmap) = " + std::to_string(pop) + " but n = " + std::to_string(n));

    f.scale = scale;
    f.has_scale = true;
    f.symbols.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d / 2));
    std::memcpy(f.symbols.data(), bytes.data() + wire::kHeaderBytes + bm_bytes, n * d * 4);
    return f;
}

// Equivalent-symbol cost of the side information (header + bitmap) under a
// 2 bits/symbol side channel; reporting only, independent of n.
inline double overhead_symbols(int l, int /*c*/) {
    if (l < 1) throw DimensionError("overhead_symbols: l must be >= 1");
    const double header_bits = static_cast<double>(wire::kHeaderBytes) * 8.0;
    return (header_bits + static_cast<double>(l)) / wire::kSideChannelBitsPerSymbol;
}

}  // namespace semcom

#endif
