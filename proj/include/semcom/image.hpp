#ifndef SEMCOM_IMAGE_HPP
#define SEMCOM_IMAGE_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "semcom/common.hpp"

namespace semcom {

// H×W×3 image, values in [0,1], channel-interleaved (r,g,b per pixel).
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> pixels;  // size = height*width*3

    Image() = default;
    Image(int h, int w, float fill = 0.0f) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

    float& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

inline Image mid_gray_image(int h, int w) { return Image(h, w, 0.5f); }

inline double mse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw DimensionError("mse: image shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.pixels.size());
}

inline double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return 99.0;
    return 10.0 * std::log10(1.0 / m);
}

// ── patch sequence ──────────────────────────────────────────────────────────
//
// Rows are patches in raster order (left-to-right, top-to-bottom); each row is
// the patch's pixels flattened as (py, px, channel), width 3*patch_size^2.

inline void check_patch_geometry(int h, int w, int patch_size, const char* who) {
    if (patch_size <= 0) throw DimensionError(std::string(who) + ": patch_size must be positive");
    if (h <= 0 || w <= 0) throw DimensionError(std::string(who) + ": empty image");
    if (h % patch_size != 0 || w % patch_size != 0)
        throw DimensionError(std::string(who) + ": image " + std::to_string(h) + "x" + std::to_string(w) +
                             " not divisible by patch_size " + std::to_string(patch_size));
}

template <class T>
Mat<T> patchify(const Image& img, int patch_size) {
    check_patch_geometry(img.height, img.width, patch_size, "patchify");
    const int gh = img.height / patch_size;
    const int gw = img.width / patch_size;
    const int dp = 3 * patch_size * patch_size;
    Mat<T> out(static_cast<Eigen::Index>(gh) * gw, dp);
    for (int py = 0; py < gh; ++py) {
        for (int px = 0; px < gw; ++px) {
            T* row = out.row(static_cast<Eigen::Index>(py) * gw + px).data();
            int k = 0;
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    for (int c = 0; c < 3; ++c)
                        row[k++] = static_cast<T>(img.at(py * patch_size + y, px * patch_size + x, c));
        }
    }
    return out;
}

template <class T>
Image unpatchify(const Mat<T>& patches, int h, int w) {
    const Eigen::Index l = patches.rows();
    const Eigen::Index dp = patches.cols();
    if (dp % 3 != 0) throw DimensionError("unpatchify: patch width not a multiple of 3");
    const int ps2 = static_cast<int>(dp / 3);
    const int patch_size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(ps2))));
    if (patch_size * patch_size != ps2) throw DimensionError("unpatchify: patch width is not 3*k^2");
    check_patch_geometry(h, w, patch_size, "unpatchify");
    const int gh = h / patch_size;
    const int gw = w / patch_size;
    if (l != static_cast<Eigen::Index>(gh) * gw)
        throw DimensionError("unpatchify: " + std::to_string(l) + " patches do not tile " + std::to_string(h) + "x" +
                             std::to_string(w) + " at patch_size " + std::to_string(patch_size));
    Image img(h, w);
    for (int py = 0; py < gh; ++py) {
        for (int px = 0; px < gw; ++px) {
            const T* row = patches.row(static_cast<Eigen::Index>(py) * gw + px).data();
            int k = 0;
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    for (int c = 0; c < 3; ++c)
                        img.at(py * patch_size + y, px * patch_size + x, c) = static_cast<float>(row[k++]);
        }
    }
    return img;
}

template <class T>
Image clamp_to_image(const Mat<T>& patches, int h, int w) {
    Mat<T> clamped = patches.cwiseMax(T(0)).cwiseMin(T(1));
    return unpatchify(clamped, h, w);
}

}  // namespace semcom

#endif
