#ifndef SEMCOM_WEIGHTING_HPP
#define SEMCOM_WEIGHTING_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "semcom/archive.hpp"
#include "semcom/common.hpp"

namespace semcom {

// Per-feature importance values in [0,1], length l.
using WeightVector = std::vector<double>;

// Comparisons against thresholds treat values within this slack as equal, so
// "keep on tie" behaves the same for decimal grids stored in binary floats.
inline constexpr double kWeightTieEps = 1e-9;

inline WeightVector minmax_normalize(const std::vector<double>& scores) {
    WeightVector w(scores.size(), 0.5);
    if (scores.empty()) return w;
    const auto [mn_it, mx_it] = std::minmax_element(scores.begin(), scores.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx - mn <= 0.0) return w;  // all equal
    for (std::size_t i = 0; i < scores.size(); ++i) w[i] = (scores[i] - mn) / (mx - mn);
    return w;
}

// ── corpus statistics for the entropy weight model ──────────────────────────

struct CorpusStats {
    VecD mean;  // per feature dimension
    VecD var;
    std::uint64_t fingerprint = 0;  // of the corpus the stats were computed on
    std::int64_t sample_count = 0;

    static constexpr int kFormatVersion = 1;

    void save(const std::string& path) const {
        Archive a;
        a.manifest["kind"] = "corpus_stats";
        a.manifest["format_version"] = kFormatVersion;
        a.manifest["fingerprint"] = fingerprint;
        a.manifest["sample_count"] = sample_count;
        std::vector<double> m(mean.data(), mean.data() + mean.size());
        std::vector<double> v(var.data(), var.data() + var.size());
        a.add("mean", m);
        a.add("var", v);
        a.save(path);
    }

    static CorpusStats load(const std::string& path) {
        Archive a = Archive::load(path);
        if (a.manifest.value("kind", "") != "corpus_stats") throw IoError("corpus stats: wrong archive kind");
        if (a.manifest.value("format_version", 0) != kFormatVersion)
            throw IoError("corpus stats: unsupported format version");
        CorpusStats s;
        auto m = a.get<double>("mean");
        auto v = a.get<double>("var");
        s.mean = Eigen::Map<VecD>(m.data(), static_cast<Eigen::Index>(m.size()));
        s.var = Eigen::Map<VecD>(v.data(), static_cast<Eigen::Index>(v.size()));
        s.fingerprint = a.manifest.value("fingerprint", std::uint64_t(0));
        s.sample_count = a.manifest.value("sample_count", std::int64_t(0));
        return s;
    }
};

// Sample mean/variance per feature dimension, pooled over all rows of all
// feature matrices in the corpus.
template <class T>
CorpusStats compute_corpus_stats(const std::vector<Mat<T>>& corpus_features, std::uint64_t fingerprint = 0) {
    if (corpus_features.empty()) throw DimensionError("compute_corpus_stats: empty corpus");
    const Eigen::Index d = corpus_features.front().cols();
    VecD sum = VecD::Zero(d), sumsq = VecD::Zero(d);
    std::int64_t count = 0;
    for (const auto& f : corpus_features) {
        if (f.cols() != d) throw DimensionError("compute_corpus_stats: inconsistent feature width");
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                const double x = static_cast<double>(f(i, j));
                sum(j) += x;
                sumsq(j) += x * x;
            }
            ++count;
        }
    }
    CorpusStats s;
    s.sample_count = count;
    s.fingerprint = fingerprint;
    s.mean = sum / static_cast<double>(count);
    s.var = (sumsq / static_cast<double>(count) - s.mean.cwiseProduct(s.mean)).cwiseMax(0.0);
    return s;
}

// Weight_i = min-max normalized negative log-likelihood of feature i under an
// independent per-dimension Gaussian with the corpus statistics.
// Zero-variance dimensions carry no information and are excluded from the NLL.
template <class T>
WeightVector entropy_weights(const Mat<T>& features, const CorpusStats& stats) {
    const Eigen::Index l = features.rows();
    const Eigen::Index d = features.cols();
    if (stats.mean.size() != d || stats.var.size() != d)
        throw DimensionError("entropy_weights: stats dimension mismatch");
    double log_norm = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
        if (stats.var(j) > 0.0) log_norm += 0.5 * std::log(2.0 * M_PI * stats.var(j));
    std::vector<double> nll(static_cast<std::size_t>(l), 0.0);
    for (Eigen::Index i = 0; i < l; ++i) {
        double acc = log_norm;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (stats.var(j) <= 0.0) continue;
            const double z = static_cast<double>(features(i, j)) - stats.mean(j);
            acc += 0.5 * z * z / stats.var(j);
        }
        nll[static_cast<std::size_t>(i)] = acc;
    }
    return minmax_normalize(nll);
}

// ── activation-map pooling for the task weight model ────────────────────────

// Area-weighted pooling of an arbitrary mh×mw map onto a gh×gw patch grid;
// exact average when the map tiles the grid evenly.
inline Mat<double> pool_map_to_grid(const Mat<double>& map, int gh, int gw) {
    const auto mh = static_cast<int>(map.rows());
    const auto mw = static_cast<int>(map.cols());
    if (mh < 1 || mw < 1 || gh < 1 || gw < 1) throw DimensionError("pool_map_to_grid: empty map or grid");
    Mat<double> out = Mat<double>::Zero(gh, gw);
    const double sy = static_cast<double>(mh) / gh;
    const double sx = static_cast<double>(mw) / gw;
    for (int gy = 0; gy < gh; ++gy) {
        const double y0 = gy * sy, y1 = (gy + 1) * sy;
        for (int gx = 0; gx < gw; ++gx) {
            const double x0 = gx * sx, x1 = (gx + 1) * sx;
            double acc = 0.0, area = 0.0;
            for (int my = static_cast<int>(std::floor(y0)); my < static_cast<int>(std::ceil(y1)); ++my) {
                const double oy = std::min<double>(y1, my + 1) - std::max<double>(y0, my);
                if (oy <= 0) continue;
                for (int mx = static_cast<int>(std::floor(x0)); mx < static_cast<int>(std::ceil(x1)); ++mx) {
                    const double ox = std::min<double>(x1, mx + 1) - std::max<double>(x0, mx);
                    if (ox <= 0) continue;
                    acc += map(my, mx) * oy * ox;
                    area += oy * ox;
                }
            }
            out(gy, gx) = acc / area;
        }
    }
    return out;
}

// Min-max normalized weights from a spatial activation-magnitude map.
inline WeightVector weights_from_activation_map(const Mat<double>& map, int gh, int gw) {
    Mat<double> pooled = pool_map_to_grid(map, gh, gw);
    std::vector<double> scores(static_cast<std::size_t>(gh) * gw);
    for (int y = 0; y < gh; ++y)
        for (int x = 0; x < gw; ++x) scores[static_cast<std::size_t>(y) * gw + x] = pooled(y, x);
    return minmax_normalize(scores);
}

// ── mask selection policies ─────────────────────────────────────────────────

struct MaskPolicy {
    enum class Mode { threshold, topk };
    Mode mode = Mode::threshold;
    double mu = 0.0;  // threshold mode
    int top_l = 1;    // topk mode
};

// bit_i = 1 iff w_i >= mu; an all-zero result keeps exactly the argmax weight
// (lowest index on ties) so the frame never goes empty.
inline MaskBitmap select_threshold(const WeightVector& w, double mu) {
    MaskBitmap bits(w.size(), 0);
    int kept = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] >= mu - kWeightTieEps) {
            bits[i] = 1;
            ++kept;
        }
    }
    if (kept == 0 && !w.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < w.size(); ++i)
            if (w[i] > w[best]) best = i;
        bits[best] = 1;
    }
    return bits;
}

// Exactly the L largest weights, ties broken toward the lower index.
inline MaskBitmap select_topk(const WeightVector& w, int top_l) {
    const int l = static_cast<int>(w.size());
    if (top_l < 1 || top_l > l) throw DimensionError("select_topk: L out of range [1, l]");
    std::vector<int> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
    MaskBitmap bits(w.size(), 0);
    for (int k = 0; k < top_l; ++k) bits[static_cast<std::size_t>(order[k])] = 1;
    return bits;
}

struct RateMatchResult {
    MaskBitmap bitmap;
    double final_mu = 0.0;
};

// Raise mu from mu0 in increments of step until the kept features fit the
// symbol budget. budget >= c always succeeds: past mu = 1 the keep-one
// fallback leaves a single feature.
inline RateMatchResult rate_match(const WeightVector& w, long long budget_symbols, int symbols_per_feature,
                                  double mu0, double step) {
    if (symbols_per_feature < 1) throw DimensionError("rate_match: symbols_per_feature must be >= 1");
    if (budget_symbols < symbols_per_feature)
        throw InfeasibleBudgetError("rate_match: budget " + std::to_string(budget_symbols) +
                                    " below one feature's cost " + std::to_string(symbols_per_feature));
    if (step <= 0.0) throw DimensionError("rate_match: step must be positive");
    if (mu0 < 0.0 || mu0 > 1.0) throw DimensionError("rate_match: mu0 outside [0,1]");
    for (int k = 0;; ++k) {
        const double mu = mu0 + k * step;
        MaskBitmap bits = select_threshold(w, mu);
        const long long used = static_cast<long long>(popcount(bits)) * symbols_per_feature;
        if (used <= budget_symbols) return {std::move(bits), mu};
        if (mu > 1.0 + kWeightTieEps)
            throw Error("rate_match: failed to conform past mu=1 (unreachable for budget >= c)");
    }
}

}  // namespace semcom

#endif
