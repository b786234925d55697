#ifndef SEMCOM_BASELINE_HPP
#define SEMCOM_BASELINE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/common.hpp"
#include "semcom/image.hpp"
#include "semcom/rng.hpp"

namespace semcom {

// Separate source/channel chain standing in for a classical codec: block-DCT
// source coder with run-level Exp-Golomb entropy coding, a (7,4) Hamming
// channel code, and BPSK over the shared link models. Exhibits the classic
// cliff: one uncorrected bit error usually desynchronizes the entropy decode.

struct BaselineConfig {
    double quality = 1.0;  // quantization step scale, > 0
    int block_size = 8;
};

// ── bit sequence container: u32 little-endian bit count, bits MSB-first ─────

struct Bitstream {
    std::vector<std::uint8_t> bits;  // one bit per element, values 0/1

    std::size_t bit_count() const { return bits.size(); }

    std::vector<std::uint8_t> to_bytes() const {
        std::vector<std::uint8_t> out(4 + (bits.size() + 7) / 8, 0);
        const auto n = static_cast<std::uint32_t>(bits.size());
        for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((n >> (8 * i)) & 0xff);
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out[4 + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        return out;
    }

    static std::optional<Bitstream> from_bytes(const std::vector<std::uint8_t>& bytes) {
        if (bytes.size() < 4) return std::nullopt;
        std::uint32_t n = 0;
        for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(bytes[static_cast<std::size_t>(i)]) << (8 * i);
        if (bytes.size() != 4 + (static_cast<std::size_t>(n) + 7) / 8) return std::nullopt;
        Bitstream bs;
        bs.bits.resize(n);
        for (std::size_t i = 0; i < n; ++i) bs.bits[i] = (bytes[4 + i / 8] >> (7 - i % 8)) & 1;
        return bs;
    }
};

namespace eg {

inline void put_bit(Bitstream& bs, int b) { bs.bits.push_back(static_cast<std::uint8_t>(b & 1)); }

// unsigned Exp-Golomb
inline void put_ue(Bitstream& bs, std::uint32_t v) {
    const std::uint32_t x = v + 1;
    int nbits = 0;
    while ((x >> nbits) > 1) ++nbits;
    for (int i = 0; i < nbits; ++i) put_bit(bs, 0);
    for (int i = nbits; i >= 0; --i) put_bit(bs, (x >> i) & 1);
}

inline void put_se(Bitstream& bs, std::int32_t v) {
    put_ue(bs, v > 0 ? static_cast<std::uint32_t>(2 * v - 1) : static_cast<std::uint32_t>(-2 * v));
}

class Reader {
   public:
    explicit Reader(const Bitstream& bs) : bits_(bs.bits) {}

    bool done() const { return pos_ >= bits_.size(); }

    std::optional<int> bit() {
        if (pos_ >= bits_.size()) return std::nullopt;
        return bits_[pos_++];
    }

    std::optional<std::uint32_t> ue() {
        int zeros = 0;
        while (true) {
            auto b = bit();
            if (!b) return std::nullopt;
            if (*b) break;
            if (++zeros > 31) return std::nullopt;  // malformed
        }
        std::uint32_t x = 1;
        for (int i = 0; i < zeros; ++i) {
            auto b = bit();
            if (!b) return std::nullopt;
            x = (x << 1) | static_cast<std::uint32_t>(*b);
        }
        return x - 1;
    }

    std::optional<std::int32_t> se() {
        auto u = ue();
        if (!u) return std::nullopt;
        return (*u & 1) ? static_cast<std::int32_t>((*u + 1) / 2) : -static_cast<std::int32_t>(*u / 2);
    }

   private:
    const std::vector<std::uint8_t>& bits_;
    std::size_t pos_ = 0;
};

}  // namespace eg

// ── block DCT source coder ──────────────────────────────────────────────────

namespace dct {

inline Mat<double> basis(int n) {
    Mat<double> c(n, n);
    for (int k = 0; k < n; ++k) {
        const double a = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i) c(k, i) = a * std::cos(M_PI * (2 * i + 1) * k / (2.0 * n));
    }
    return c;
}

// zigzag order of an n×n block
inline std::vector<int> zigzag_order(int n) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n) * n);
    for (int s = 0; s <= 2 * (n - 1); ++s) {
        if (s % 2 == 0) {
            for (int y = std::min(s, n - 1); y >= std::max(0, s - n + 1); --y) order.push_back(y * n + (s - y));
        } else {
            for (int x = std::min(s, n - 1); x >= std::max(0, s - n + 1); --x) order.push_back((s - x) * n + x);
        }
    }
    return order;
}

// step grows with zigzag distance from DC: quality * base * (1 + 0.5*(u+v))
inline double quant_step(double quality, int u, int v) { return quality * 0.02 * (1.0 + 0.5 * (u + v)); }

inline constexpr std::int32_t kMaxLevel = 1 << 15;  // decoder sanity bound

}  // namespace dct

inline Bitstream transform_encode(const Image& img, const BaselineConfig& cfg) {
    if (cfg.quality <= 0.0) throw DimensionError("transform_encode: quality must be positive");
    const int bs = cfg.block_size;
    if (img.height % bs != 0 || img.width % bs != 0)
        throw DimensionError("transform_encode: block_size must divide image dimensions");
    const Mat<double> c = dct::basis(bs);
    const std::vector<int> zz = dct::zigzag_order(bs);
    Bitstream out;
    Mat<double> block(bs, bs);
    for (int ch = 0; ch < 3; ++ch) {
        for (int by = 0; by < img.height; by += bs) {
            for (int bx = 0; bx < img.width; bx += bs) {
                for (int y = 0; y < bs; ++y)
                    for (int x = 0; x < bs; ++x) block(y, x) = static_cast<double>(img.at(by + y, bx + x, ch)) - 0.5;
                Mat<double> coef = c * block * c.transpose();
                // DC first, then run-level pairs over the zigzag scan;
                // symbol 0 = end-of-block, symbol r+1 = r zeros then a level
                const std::int32_t dc =
                    static_cast<std::int32_t>(std::lround(coef(0, 0) / dct::quant_step(cfg.quality, 0, 0)));
                eg::put_se(out, dc);
                int run = 0;
                for (std::size_t k = 1; k < zz.size(); ++k) {
                    const int u = zz[k] / bs, v = zz[k] % bs;
                    const std::int32_t q =
                        static_cast<std::int32_t>(std::lround(coef(u, v) / dct::quant_step(cfg.quality, u, v)));
                    if (q == 0) {
                        ++run;
                        continue;
                    }
                    eg::put_ue(out, static_cast<std::uint32_t>(run + 1));
                    eg::put_se(out, q);
                    run = 0;
                }
                eg::put_ue(out, 0);  // end of block
            }
        }
    }
    return out;
}

// Returns nullopt on any malformed input; the caller substitutes a failure
// image so the output is always scorable.
inline std::optional<Image> transform_decode(const Bitstream& stream, const BaselineConfig& cfg, int h, int w) {
    const int bs = cfg.block_size;
    if (cfg.quality <= 0.0 || bs < 1 || h % bs != 0 || w % bs != 0) return std::nullopt;
    const Mat<double> c = dct::basis(bs);
    const std::vector<int> zz = dct::zigzag_order(bs);
    eg::Reader in(stream);
    Image img(h, w);
    Mat<double> coef(bs, bs);
    for (int ch = 0; ch < 3; ++ch) {
        for (int by = 0; by < h; by += bs) {
            for (int bx = 0; bx < w; bx += bs) {
                coef.setZero();
                auto dc = in.se();
                if (!dc || std::abs(*dc) > dct::kMaxLevel) return std::nullopt;
                coef(0, 0) = static_cast<double>(*dc) * dct::quant_step(cfg.quality, 0, 0);
                std::size_t pos = 0;  // last filled zigzag index
                while (true) {
                    auto sym = in.ue();
                    if (!sym) return std::nullopt;
                    if (*sym == 0) break;  // end of block
                    pos += *sym;           // advance over (sym-1) zeros to the level slot
                    if (pos >= zz.size()) return std::nullopt;
                    auto level = in.se();
                    if (!level || *level == 0 || std::abs(*level) > dct::kMaxLevel) return std::nullopt;
                    const int u = zz[pos] / bs, v = zz[pos] % bs;
                    coef(u, v) = static_cast<double>(*level) * dct::quant_step(cfg.quality, u, v);
                }
                Mat<double> block = c.transpose() * coef * c;
                for (int y = 0; y < bs; ++y)
                    for (int x = 0; x < bs; ++x)
                        img.at(by + y, bx + x, ch) =
                            static_cast<float>(std::clamp(block(y, x) + 0.5, 0.0, 1.0));
            }
        }
    }
    if (!in.done()) return std::nullopt;  // trailing bits mean desync
    return img;
}

// ── (7,4) Hamming code ──────────────────────────────────────────────────────

// codeword layout [p1 p2 d1 p3 d2 d3 d4]; corrects any single bit error
inline std::vector<std::uint8_t> hamming74_encode(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 4 != 0) throw DimensionError("hamming74_encode: input must be a multiple of 4 bits");
    std::vector<std::uint8_t> out;
    out.reserve(bits.size() / 4 * 7);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        const int d1 = bits[i], d2 = bits[i + 1], d3 = bits[i + 2], d4 = bits[i + 3];
        const int p1 = d1 ^ d2 ^ d4;
        const int p2 = d1 ^ d3 ^ d4;
        const int p3 = d2 ^ d3 ^ d4;
        const int cw[7] = {p1, p2, d1, p3, d2, d3, d4};
        for (int b : cw) out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
}

inline std::vector<std::uint8_t> hamming74_decode(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 7 != 0) throw DimensionError("hamming74_decode: input must be a multiple of 7 bits");
    std::vector<std::uint8_t> out;
    out.reserve(bits.size() / 7 * 4);
    for (std::size_t i = 0; i < bits.size(); i += 7) {
        int cw[7];
        for (int k = 0; k < 7; ++k) cw[k] = bits[i + static_cast<std::size_t>(k)];
        const int s1 = cw[0] ^ cw[2] ^ cw[4] ^ cw[6];
        const int s2 = cw[1] ^ cw[2] ^ cw[5] ^ cw[6];
        const int s3 = cw[3] ^ cw[4] ^ cw[5] ^ cw[6];
        const int syndrome = s1 + 2 * s2 + 4 * s3;  // 1-based error position
        if (syndrome != 0) cw[syndrome - 1] ^= 1;
        out.push_back(static_cast<std::uint8_t>(cw[2]));
        out.push_back(static_cast<std::uint8_t>(cw[4]));
        out.push_back(static_cast<std::uint8_t>(cw[5]));
        out.push_back(static_cast<std::uint8_t>(cw[6]));
    }
    return out;
}

// ── full chain ──────────────────────────────────────────────────────────────

struct BaselineResult {
    Image image;
    long long symbols_used = 0;  // BPSK channel uses = coded bit count
    bool decode_failed = false;
    ChannelReport report;
};

// encode → Hamming → BPSK (unit power) → channel (+ ZF) → hard decision →
// Hamming decode → source decode; failure collapses to mid-gray.
inline BaselineResult baseline_transmit(const Image& img, const BaselineConfig& cfg, ChannelKind kind, double snr_db,
                                        Rng& rng) {
    Bitstream source = transform_encode(img, cfg);
    std::vector<std::uint8_t> padded = source.bits;
    while (padded.size() % 4 != 0) padded.push_back(0);
    const std::vector<std::uint8_t> coded = hamming74_encode(padded);

    CMat<float> symbols(static_cast<Eigen::Index>(coded.size()), 1);
    for (std::size_t i = 0; i < coded.size(); ++i)
        symbols(static_cast<Eigen::Index>(i), 0) = std::complex<float>(coded[i] ? -1.0f : 1.0f, 0.0f);

    BaselineResult res;
    res.symbols_used = static_cast<long long>(coded.size());
    res.report = transmit_symbols(symbols, kind, snr_db, rng);

    std::vector<std::uint8_t> received(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i)
        received[i] = symbols(static_cast<Eigen::Index>(i), 0).real() < 0.0f ? 1 : 0;

    std::vector<std::uint8_t> decoded = hamming74_decode(received);
    decoded.resize(source.bit_count());
    Bitstream rx;
    rx.bits = std::move(decoded);

    auto out = transform_decode(rx, cfg, img.height, img.width);
    if (out) {
        res.image = std::move(*out);
    } else {
        res.image = mid_gray_image(img.height, img.width);
        res.decode_failed = true;
    }
    return res;
}

inline BaselineResult baseline_transmit(const Image& img, const BaselineConfig& cfg, const ChannelConfig& ch) {
    Rng rng(ch.seed);
    return baseline_transmit(img, cfg, ch.kind, ch.snr_db, rng);
}

}  // namespace semcom

#endif
