#ifndef SEMCOM_METRICS_HPP
#define SEMCOM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "semcom/codec.hpp"
#include "semcom/common.hpp"
#include "semcom/image.hpp"

namespace semcom {

inline double cosine_similarity(const VecD& a, const VecD& b) {
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-12 || nb < 1e-12) throw Error("cosine_similarity: zero-norm embedding");
    return a.dot(b) / (na * nb);
}

// Mean-pooled feature embedding under a frozen encoder (the channel-free
// pretrained codec), used as the semantic similarity space.
template <class T>
VecD mean_pooled_embedding(const CodecModel<T>& embed, const Image& img) {
    Mat<T> features = encode_features(embed, patchify<T>(img, embed.cfg.patch_size));
    return features.template cast<double>().colwise().mean().transpose();
}

template <class T>
double semantic_similarity(const CodecModel<T>& embed, const Image& a, const Image& b) {
    return cosine_similarity(mean_pooled_embedding(embed, a), mean_pooled_embedding(embed, b));
}

// Smallest L whose similarity is within eps of the full-transmission value;
// curve must cover L = 1..L_tot in order.
inline int find_L_opt(const std::vector<std::pair<int, double>>& curve, double eps = 0.01) {
    if (curve.empty()) throw DimensionError("find_L_opt: empty curve");
    if (eps < 0.0) throw DimensionError("find_L_opt: eps must be >= 0");
    const int l_tot = static_cast<int>(curve.size());
    for (int i = 0; i < l_tot; ++i)
        if (curve[static_cast<std::size_t>(i)].first != i + 1)
            throw DimensionError("find_L_opt: curve must cover L = 1..L_tot in order");
    const double target = curve.back().second - eps;
    for (const auto& [l, sim] : curve)
        if (sim >= target) return l;
    return l_tot;  // unreachable: the last point always qualifies
}

// Spearman rank correlation with average ranks on ties.
inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw DimensionError("spearman_rho: need two equal-length series");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(xs), ry = ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx <= 0 || dy <= 0) return 0.0;
    return num / std::sqrt(dx * dy);
}

}  // namespace semcom

#endif
