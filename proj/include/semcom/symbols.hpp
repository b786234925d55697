#ifndef SEMCOM_SYMBOLS_HPP
#define SEMCOM_SYMBOLS_HPP

#include <cmath>
#include <complex>

#include "semcom/common.hpp"

namespace semcom {

// Power-normalized channel symbols for the kept features, plus the sent/unsent
// bitmap and the normalization factor needed to invert the mapping.
// Invariant: mean |symbol|^2 over the frame is 1 (within 1e-6) and
// symbols.rows() == popcount(bitmap).
template <class T>
struct SymbolFrame {
    CMat<T> symbols;     // n × c, c = d/2
    MaskBitmap bitmap;   // length l, bit i = feature i was sent
    T scale = T(1);      // factor applied to the raw features
    bool has_scale = false;
};

using SymbolFrameF = SymbolFrame<float>;

template <class T>
double frame_mean_power(const SymbolFrame<T>& f) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < f.symbols.rows(); ++i)
        for (Eigen::Index j = 0; j < f.symbols.cols(); ++j) acc += std::norm(std::complex<double>(f.symbols(i, j)));
    return acc / static_cast<double>(f.symbols.size());
}

// Scale factor that brings an n×d real feature block to unit mean symbol
// power: sqrt(n*c) / ||V||_F. Accumulated in double so the 1e-6 power
// tolerance holds for any frame size.
template <class T>
double power_norm_scale(const Mat<T>& kept) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < kept.rows(); ++i)
        for (Eigen::Index j = 0; j < kept.cols(); ++j) sq += static_cast<double>(kept(i, j)) * kept(i, j);
    if (sq <= 0.0) throw DegenerateFrameError("features_to_symbols: all-zero feature block has no power scale");
    const double total = static_cast<double>(kept.rows()) * (static_cast<double>(kept.cols()) / 2.0);
    return std::sqrt(total / sq);
}

// Consecutive real pairs of each feature row become one complex symbol; the
// whole frame is scaled to unit mean symbol power.
template <class T>
SymbolFrame<T> features_to_symbols(const Mat<T>& kept, MaskBitmap bitmap) {
    const Eigen::Index n = kept.rows();
    const Eigen::Index d = kept.cols();
    if (n < 1) throw DimensionError("features_to_symbols: need at least one kept feature");
    if (d % 2 != 0) throw DimensionError("features_to_symbols: feature width must be even");
    if (popcount(bitmap) != static_cast<int>(n))
        throw DimensionError("features_to_symbols: popcount(bitmap) != kept row count");
    const T scale = static_cast<T>(power_norm_scale(kept));
    SymbolFrame<T> f;
    f.bitmap = std::move(bitmap);
    f.scale = scale;
    f.has_scale = true;
    f.symbols.resize(n, d / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d / 2; ++j)
            f.symbols(i, j) = std::complex<T>(kept(i, 2 * j) * scale, kept(i, 2 * j + 1) * scale);
    return f;
}

template <class T>
Mat<T> symbols_to_features(const SymbolFrame<T>& f) {
    if (!f.has_scale) throw Error("symbols_to_features: frame has no scale metadata");
    const Eigen::Index n = f.symbols.rows();
    const Eigen::Index c = f.symbols.cols();
    Mat<T> out(n, 2 * c);
    const T inv = T(1) / f.scale;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            out(i, 2 * j) = f.symbols(i, j).real() * inv;
            out(i, 2 * j + 1) = f.symbols(i, j).imag() * inv;
        }
    }
    return out;
}

inline MaskBitmap all_ones_bitmap(int l) { return MaskBitmap(static_cast<std::size_t>(l), 1); }

}  // namespace semcom

#endif
