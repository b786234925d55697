#ifndef SEMCOM_DATASET_HPP
#define SEMCOM_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/archive.hpp"
#include "semcom/common.hpp"
#include "semcom/image.hpp"
#include "semcom/rng.hpp"

namespace semcom {

// 32×32×3 synthetic scene: one bright shape (the task-relevant object) on a
// dark low-frequency textured background, with an exact object-pixel mask.
// 10 classes = 5 shapes × 2 color families.
struct LabeledImage {
    Image image;
    int label = 0;
    std::vector<std::uint8_t> region_mask;  // H*W, 1 = object pixel

    double mask_coverage() const {
        double s = 0;
        for (auto b : region_mask) s += b;
        return s / static_cast<double>(region_mask.size());
    }
};

namespace detail {

enum class Shape { circle, square, triangle, ring, cross };

inline bool shape_member(Shape s, double dx, double dy, double r) {
    switch (s) {
        case Shape::circle:
            return dx * dx + dy * dy <= r * r;
        case Shape::square:
            return std::abs(dx) <= r && std::abs(dy) <= r;
        case Shape::triangle:
            return dy >= -r && dy <= r && std::abs(dx) <= 0.45 * (dy + r);
        case Shape::ring: {
            const double d2 = dx * dx + dy * dy;
            return d2 <= r * r && d2 >= (0.55 * r) * (0.55 * r);
        }
        case Shape::cross:
            return (std::abs(dx) <= 0.33 * r && std::abs(dy) <= r) || (std::abs(dy) <= 0.33 * r && std::abs(dx) <= r);
    }
    return false;
}

// radius ranges calibrated so object coverage stays within [5%, 40%] of 32×32
inline std::pair<double, double> radius_range(Shape s) {
    switch (s) {
        case Shape::circle: return {4.6, 10.4};
        case Shape::square: return {4.0, 9.4};
        case Shape::triangle: return {5.8, 11.0};
        case Shape::ring: return {5.0, 10.8};
        case Shape::cross: return {5.0, 10.8};
    }
    return {5.0, 9.0};
}

// bilinear value-noise field in [lo, hi]
inline void fill_background(Image& img, Rng& rng, double lo, double hi) {
    constexpr int kGrid = 5;
    double grid[3][kGrid][kGrid];
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < kGrid; ++y)
            for (int x = 0; x < kGrid; ++x) grid[c][y][x] = rng.uniform(lo, hi);
    for (int y = 0; y < img.height; ++y) {
        const double fy = static_cast<double>(y) / img.height * (kGrid - 1);
        const int y0 = static_cast<int>(fy);
        const double ty = fy - y0;
        for (int x = 0; x < img.width; ++x) {
            const double fx = static_cast<double>(x) / img.width * (kGrid - 1);
            const int x0 = static_cast<int>(fx);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double v00 = grid[c][y0][x0], v01 = grid[c][y0][x0 + 1];
                const double v10 = grid[c][y0 + 1][x0], v11 = grid[c][y0 + 1][x0 + 1];
                const double v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
                img.at(y, x, c) = static_cast<float>(v);
            }
        }
    }
}

}  // namespace detail

inline LabeledImage generate_labeled_image(int label, std::uint64_t image_seed, int h = 32, int w = 32) {
    if (label < 0 || label >= 10) throw DimensionError("generate_labeled_image: label outside 0..9");
    Rng rng(image_seed);
    LabeledImage out;
    out.label = label;
    out.image = Image(h, w);
    out.region_mask.assign(static_cast<std::size_t>(h) * w, 0);
    detail::fill_background(out.image, rng, 0.05, 0.40);

    const auto shape = static_cast<detail::Shape>(label / 2);
    const int color_family = label % 2;

    const auto [rmin, rmax] = detail::radius_range(shape);
    // coverage guard: redraw the radius toward mid-range if the rasterized
    // area falls outside [5%, 40%]
    double radius = rng.uniform(rmin, rmax);
    double cx = 0, cy = 0;
    int area = 0;
    const int min_area = static_cast<int>(0.05 * h * w) + 1;
    const int max_area = static_cast<int>(0.40 * h * w) - 1;
    for (int attempt = 0;; ++attempt) {
        const double margin = radius + 1.0;
        cx = rng.uniform(margin, w - margin);
        cy = rng.uniform(margin, h - margin);
        area = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                area += detail::shape_member(shape, x + 0.5 - cx, y + 0.5 - cy, radius) ? 1 : 0;
        if (area >= min_area && area <= max_area) break;
        radius = (area < min_area) ? std::min(rmax, radius * 1.15) : std::max(rmin, radius * 0.87);
        if (attempt > 64) {  // calibrated ranges make this unreachable
            radius = 0.5 * (rmin + rmax);
        }
    }

    // warm family: red-dominant; cool family: blue-dominant; both bright
    float base[3];
    if (color_family == 0) {
        base[0] = static_cast<float>(rng.uniform(0.75, 0.95));
        base[1] = static_cast<float>(rng.uniform(0.35, 0.60));
        base[2] = static_cast<float>(rng.uniform(0.10, 0.30));
    } else {
        base[0] = static_cast<float>(rng.uniform(0.10, 0.30));
        base[1] = static_cast<float>(rng.uniform(0.35, 0.60));
        base[2] = static_cast<float>(rng.uniform(0.75, 0.95));
    }
    const double shade_dir = rng.uniform(-0.08, 0.08);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!detail::shape_member(shape, x + 0.5 - cx, y + 0.5 - cy, radius)) continue;
            out.region_mask[static_cast<std::size_t>(y) * w + x] = 1;
            const float shade = static_cast<float>(1.0 + shade_dir * (y - cy) / radius);
            for (int c = 0; c < 3; ++c)
                out.image.at(y, x, c) = std::min(1.0f, std::max(0.0f, base[c] * shade));
        }
    }
    return out;
}

// Deterministic dataset: labels cycle through all 10 classes in a seeded
// shuffled order (exact class balance); every image derives its own stream
// from (seed, index), so prefixes of a longer dataset match a shorter one.
inline std::vector<LabeledImage> generate_dataset(int count, std::uint64_t seed, int h = 32, int w = 32) {
    if (count < 1) throw DimensionError("generate_dataset: count must be >= 1");
    std::vector<int> labels(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
    Rng label_rng(derive_seed(seed, "dataset.labels"));
    label_rng.shuffle(labels.begin(), labels.end());
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(generate_labeled_image(labels[static_cast<std::size_t>(i)],
                                             derive_seed(seed, "dataset.image", static_cast<std::uint64_t>(i)), h, w));
    return out;
}

inline constexpr int kDatasetCacheVersion = 1;

inline void save_dataset(const std::vector<LabeledImage>& data, std::uint64_t seed, const std::string& path) {
    if (data.empty()) throw DimensionError("save_dataset: empty dataset");
    const int h = data.front().image.height, w = data.front().image.width;
    Archive a;
    a.manifest["kind"] = "dataset_cache";
    a.manifest["format_version"] = kDatasetCacheVersion;
    a.manifest["seed"] = seed;
    a.manifest["count"] = data.size();
    a.manifest["height"] = h;
    a.manifest["width"] = w;
    std::vector<float> pixels;
    std::vector<std::int32_t> labels;
    std::vector<std::uint8_t> masks;
    pixels.reserve(data.size() * data.front().image.pixels.size());
    for (const auto& li : data) {
        pixels.insert(pixels.end(), li.image.pixels.begin(), li.image.pixels.end());
        labels.push_back(li.label);
        masks.insert(masks.end(), li.region_mask.begin(), li.region_mask.end());
    }
    a.add("pixels", pixels,
          {static_cast<std::uint32_t>(data.size()), static_cast<std::uint32_t>(h * w * 3)});
    a.add("labels", labels);
    a.add("masks", masks, {static_cast<std::uint32_t>(data.size()), static_cast<std::uint32_t>(h * w)});
    a.save(path);
}

inline std::vector<LabeledImage> load_dataset(const std::string& path, std::uint64_t* seed_out = nullptr) {
    Archive a = Archive::load(path);
    if (a.manifest.value("kind", "") != "dataset_cache") throw IoError("dataset cache: wrong archive kind");
    if (a.manifest.value("format_version", 0) != kDatasetCacheVersion)
        throw IoError("dataset cache: unsupported format version");
    const int h = a.manifest.at("height"), w = a.manifest.at("width");
    const auto count = static_cast<std::size_t>(a.manifest.at("count").get<std::uint64_t>());
    auto pixels = a.get<float>("pixels");
    auto labels = a.get<std::int32_t>("labels");
    auto masks = a.get<std::uint8_t>("masks");
    const std::size_t px = static_cast<std::size_t>(h) * w * 3, mx = static_cast<std::size_t>(h) * w;
    if (pixels.size() != count * px || labels.size() != count || masks.size() != count * mx)
        throw IoError("dataset cache: array sizes inconsistent with count");
    std::vector<LabeledImage> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i].image = Image(h, w);
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(i * px), px, out[i].image.pixels.begin());
        out[i].label = labels[i];
        out[i].region_mask.assign(masks.begin() + static_cast<std::ptrdiff_t>(i * mx),
                                  masks.begin() + static_cast<std::ptrdiff_t>((i + 1) * mx));
    }
    if (seed_out) *seed_out = a.manifest.value("seed", std::uint64_t(0));
    return out;
}

}  // namespace semcom

#endif
