#ifndef SEMCOM_PLOT_HPP
#define SEMCOM_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "semcom/common.hpp"

// Dependency-free raster plotting: a fixed 5x7 font, Bresenham lines, and a
// PNG writer using stored (uncompressed) deflate blocks. Output bytes are a
// pure function of the plotted data.
namespace semcom::plot {

// ── png writer ──────────────────────────────────────────────────────────────

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t crc = 0xffffffffu) {
    static std::uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (std::uint32_t n = 0; n < 256; ++n) {
            std::uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[n] = c;
        }
        init = true;
    }
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc;
}

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4], const std::vector<std::uint8_t>& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const std::uint32_t crc = crc32(out.data() + start, out.size() - start) ^ 0xffffffffu;
    put_u32_be(out, crc);
}

}  // namespace detail

// rgb: height*width*3 bytes, row-major
inline std::vector<std::uint8_t> encode_png(int width, int height, const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw DimensionError("encode_png: buffer size");
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * 3));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        const auto* row = rgb.data() + static_cast<std::size_t>(y) * width * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
    }

    // zlib stream with stored deflate blocks
    std::vector<std::uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const std::size_t n = std::min<std::size_t>(65535, raw.size() - pos);
        const bool final = pos + n == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<std::uint8_t>(n & 0xff));
        z.push_back(static_cast<std::uint8_t>(n >> 8));
        z.push_back(static_cast<std::uint8_t>(~n & 0xff));
        z.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos), raw.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
    }
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t byte : raw) {
        a = (a + byte) % 65521;
        b = (b + a) % 65521;
    }
    detail::put_u32_be(z, (b << 16) | a);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<std::uint8_t> ihdr;
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::put_chunk(out, "IHDR", ihdr);
    detail::put_chunk(out, "IDAT", z);
    detail::put_chunk(out, "IEND", {});
    return out;
}

// ── canvas ──────────────────────────────────────────────────────────────────

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kGray{150, 150, 150};
inline constexpr Color kLightGray{226, 226, 226};

inline const std::vector<Color>& palette() {
    static const std::vector<Color> p{{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                                      {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};
    return p;
}

class Canvas {
   public:
    Canvas(int width, int height) : w_(width), h_(height), rgb_(static_cast<std::size_t>(width) * height * 3, 255) {}

    int width() const { return w_; }
    int height() const { return h_; }

    void set(int x, int y, Color c) {
        if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
        auto* p = rgb_.data() + (static_cast<std::size_t>(y) * w_ + x) * 3;
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    void blend(int x, int y, Color c, double alpha) {
        if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
        auto* p = rgb_.data() + (static_cast<std::size_t>(y) * w_ + x) * 3;
        p[0] = static_cast<std::uint8_t>(p[0] * (1 - alpha) + c.r * alpha);
        p[1] = static_cast<std::uint8_t>(p[1] * (1 - alpha) + c.g * alpha);
        p[2] = static_cast<std::uint8_t>(p[2] * (1 - alpha) + c.b * alpha);
    }

    void line(int x0, int y0, int x1, int y1, Color c) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void filled_rect(int x0, int y0, int x1, int y1, Color c) {
        for (int y = std::max(0, y0); y <= std::min(h_ - 1, y1); ++y)
            for (int x = std::max(0, x0); x <= std::min(w_ - 1, x1); ++x) set(x, y, c);
    }

    void marker(int x, int y, Color c) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) set(x + dx, y + dy, c);
    }

    void text(int x, int y, const std::string& s, Color c, int scale = 1);

    void save_png(const std::string& path) const {
        auto bytes = encode_png(w_, h_, rgb_);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("plot: cannot open '" + path + "'");
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }

   private:
    int w_, h_;
    std::vector<std::uint8_t> rgb_;
};

// ── 5x7 font (uppercase, digits, basic punctuation) ─────────────────────────

namespace detail {

struct Glyph {
    char ch;
    std::uint8_t rows[7];  // 5 LSBs per row
};

inline const Glyph* find_glyph(char ch) {
    static const Glyph font[] = {
        {' ', {0, 0, 0, 0, 0, 0, 0}},
        {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
        {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
        {'2', {0x0e, 0x11, 0x01, 0x06, 0x08, 0x10, 0x1f}},
        {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
        {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
        {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
        {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
        {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
        {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
        {',', {0x00, 0x00, 0x00, 0x00, 0x0c, 0x04, 0x08}},
        {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
        {'+', {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00}},
        {'/', {0x01, 0x02, 0x02, 0x04, 0x08, 0x08, 0x10}},
        {'%', {0x19, 0x1a, 0x02, 0x04, 0x08, 0x0b, 0x13}},
        {'=', {0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00}},
        {':', {0x00, 0x0c, 0x0c, 0x00, 0x0c, 0x0c, 0x00}},
        {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
        {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
        {'A', {0x0e, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},
        {'B', {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e}},
        {'C', {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e}},
        {'D', {0x1c, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1c}},
        {'E', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f}},
        {'F', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x10}},
        {'G', {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f}},
        {'H', {0x11, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},
        {'I', {0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},
        {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0c}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f}},
        {'M', {0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
        {'O', {0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e}},
        {'P', {0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10, 0x10}},
        {'Q', {0x0e, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0d}},
        {'R', {0x1e, 0x11, 0x11, 0x1e, 0x14, 0x12, 0x11}},
        {'S', {0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e}},
        {'T', {0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e}},
        {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0a, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1b, 0x11}},
        {'X', {0x11, 0x11, 0x0a, 0x04, 0x0a, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0a, 0x04, 0x04, 0x04, 0x04}},
        {'Z', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1f}},
    };
    const char up = (ch >= 'a' && ch <= 'z') ? static_cast<char>(ch - 'a' + 'A') : ch;
    for (const auto& g : font)
        if (g.ch == up) return &g;
    return nullptr;
}

}  // namespace detail

inline void Canvas::text(int x, int y, const std::string& s, Color c, int scale) {
    int cx = x;
    for (char ch : s) {
        const auto* g = detail::find_glyph(ch);
        if (g) {
            for (int row = 0; row < 7; ++row)
                for (int col = 0; col < 5; ++col)
                    if ((g->rows[row] >> (4 - col)) & 1)
                        for (int sy = 0; sy < scale; ++sy)
                            for (int sx = 0; sx < scale; ++sx) set(cx + col * scale + sx, y + row * scale + sy, c);
        }
        cx += 6 * scale;
    }
}

// ── line chart ──────────────────────────────────────────────────────────────

struct Series {
    std::string name;
    std::vector<double> xs, ys;
};

struct VLine {
    double x = 0.0;
    std::string label;
};

struct RegionLabel {
    double x0 = 0, x1 = 0;
    std::string label;
};

class LinePlot {
   public:
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<VLine> vlines;
    std::vector<RegionLabel> regions;

    void add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() != ys.size()) throw DimensionError("plot series: x/y length mismatch");
        series.push_back({std::move(name), std::move(xs), std::move(ys)});
    }

    void save(const std::string& path, int width = 900, int height = 560) const {
        Canvas canvas(width, height);
        const int left = 78, right = width - 24, top = 42, bottom = height - 58;

        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, s.ys[i]);
                ymax = std::max(ymax, s.ys[i]);
            }
        if (xmin > xmax) {
            xmin = 0;
            xmax = 1;
        }
        if (ymin > ymax) {
            ymin = 0;
            ymax = 1;
        }
        if (xmax - xmin < 1e-12) {
            xmin -= 0.5;
            xmax += 0.5;
        }
        const double ypad = std::max(1e-12, (ymax - ymin) * 0.07);
        ymin -= ypad;
        ymax += ypad;

        auto px = [&](double x) {
            return left + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (right - left)));
        };
        auto py = [&](double y) {
            return bottom - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * (bottom - top)));
        };

        for (const auto& r : regions) {
            for (int x = px(r.x0); x <= px(r.x1); ++x)
                for (int y = top; y <= bottom; ++y) canvas.blend(x, y, kGray, 0.08);
            canvas.text((px(r.x0) + px(r.x1)) / 2 - 3 * static_cast<int>(r.label.size()), top + 6, r.label, kGray);
        }

        // ticks and grid
        char buf[64];
        for (int t = 0; t <= 5; ++t) {
            const double xv = xmin + (xmax - xmin) * t / 5.0;
            const double yv = ymin + (ymax - ymin) * t / 5.0;
            const int x = px(xv), y = py(yv);
            for (int yy = top; yy <= bottom; ++yy) canvas.set(x, yy, kLightGray);
            for (int xx = left; xx <= right; ++xx) canvas.set(xx, y, kLightGray);
            std::snprintf(buf, sizeof buf, "%g", std::abs(xv) < 1e-10 ? 0.0 : xv);
            canvas.text(x - 3 * static_cast<int>(std::strlen(buf)), bottom + 8, buf, kBlack);
            std::snprintf(buf, sizeof buf, "%.3g", std::abs(yv) < 1e-10 ? 0.0 : yv);
            canvas.text(left - 8 - 6 * static_cast<int>(std::strlen(buf)), y - 3, buf, kBlack);
        }

        // axes
        canvas.line(left, top, left, bottom, kBlack);
        canvas.line(left, bottom, right, bottom, kBlack);

        for (const auto& v : vlines) {
            const int x = px(v.x);
            for (int y = top; y <= bottom; y += 3) canvas.set(x, y, kBlack);
            canvas.text(x + 4, top + 4, v.label, kBlack);
        }

        for (std::size_t si = 0; si < series.size(); ++si) {
            const Color c = palette()[si % palette().size()];
            const auto& s = series[si];
            for (std::size_t i = 0; i + 1 < s.xs.size(); ++i)
                canvas.line(px(s.xs[i]), py(s.ys[i]), px(s.xs[i + 1]), py(s.ys[i + 1]), c);
            for (std::size_t i = 0; i < s.xs.size(); ++i) canvas.marker(px(s.xs[i]), py(s.ys[i]), c);
            // legend
            const int ly = top + 8 + static_cast<int>(si) * 14;
            canvas.filled_rect(right - 150, ly, right - 138, ly + 8, c);
            canvas.text(right - 132, ly, s.name, kBlack);
        }

        canvas.text((left + right) / 2 - 3 * static_cast<int>(title.size()), 14, title, kBlack);
        canvas.text((left + right) / 2 - 3 * static_cast<int>(xlabel.size()), height - 24, xlabel, kBlack);
        canvas.text(8, 14, ylabel, kBlack);
        canvas.save_png(path);
    }
};

}  // namespace semcom::plot

#endif
