#ifndef SEMCOM_CHANNEL_HPP
#define SEMCOM_CHANNEL_HPP

#include <cmath>
#include <complex>
#include <limits>

#include "semcom/common.hpp"
#include "semcom/rng.hpp"
#include "semcom/symbols.hpp"

namespace semcom {

enum class ChannelKind { awgn, rayleigh_slow };

inline const char* channel_kind_name(ChannelKind k) {
    return k == ChannelKind::awgn ? "awgn" : "rayleigh_slow";
}

struct ChannelConfig {
    ChannelKind kind = ChannelKind::awgn;
    double snr_db = 10.0;  // +infinity = noiseless
    std::uint64_t seed = 0;
};

struct ChannelReport {
    std::complex<double> h{1.0, 0.0};  // realized fading coefficient (rayleigh only)
    double noise_variance = 0.0;       // sigma^2 per complex symbol, unit signal power
    bool deep_fade = false;            // |h| < 1e-8; zero-forcing noise explodes, not resampled
};

inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();
inline constexpr double kDeepFadeMagnitude = 1e-8;

// sigma^2 = 10^(-snr/10) for a unit-power frame; snr = +inf gives exactly 0.
inline double noise_variance_for_snr_db(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

// One slow-fading coefficient, circularly-symmetric complex Gaussian with
// E[|h|^2] = 1.
inline std::complex<double> draw_fading_coefficient(Rng& rng) {
    const double re = rng.normal();
    const double im = rng.normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

template <class T>
void add_complex_noise(CMat<T>& symbols, double sigma2, Rng& rng) {
    if (sigma2 <= 0.0) return;
    const double comp = std::sqrt(sigma2 / 2.0);  // per real component
    for (Eigen::Index i = 0; i < symbols.rows(); ++i)
        for (Eigen::Index j = 0; j < symbols.cols(); ++j)
            symbols(i, j) += std::complex<T>(static_cast<T>(comp * rng.normal()), static_cast<T>(comp * rng.normal()));
}

// Fade + noise + zero-forcing on one frame, arithmetic in double so the
// noiseless path cancels h exactly even for float frames.
template <class T>
ChannelReport apply_slow_fading(CMat<T>& symbols, std::complex<double> h, double sigma2, Rng& rng) {
    ChannelReport report;
    report.noise_variance = sigma2;
    report.h = h;
    report.deep_fade = std::abs(h) < kDeepFadeMagnitude;
    const double comp = std::sqrt(sigma2 / 2.0);
    for (Eigen::Index i = 0; i < symbols.rows(); ++i) {
        for (Eigen::Index j = 0; j < symbols.cols(); ++j) {
            std::complex<double> y = h * std::complex<double>(symbols(i, j));
            if (sigma2 > 0.0) y += std::complex<double>(comp * rng.normal(), comp * rng.normal());
            y /= h;
            symbols(i, j) = std::complex<T>(static_cast<T>(y.real()), static_cast<T>(y.imag()));
        }
    }
    return report;
}

// Core link model on a raw symbol block (used by both the semantic codec
// frames and the baseline BPSK chain). Rayleigh output is zero-forcing
// equalized under perfect CSI: y_hat = (h*x + n)/h.
template <class T>
ChannelReport transmit_symbols(CMat<T>& symbols, ChannelKind kind, double snr_db, Rng& rng) {
    if (kind == ChannelKind::awgn) {
        ChannelReport report;
        report.noise_variance = noise_variance_for_snr_db(snr_db);
        add_complex_noise(symbols, report.noise_variance, rng);
        return report;
    }
    const std::complex<double> h = draw_fading_coefficient(rng);
    return apply_slow_fading(symbols, h, noise_variance_for_snr_db(snr_db), rng);
}

template <class T>
std::pair<SymbolFrame<T>, ChannelReport> transmit(const SymbolFrame<T>& frame, const ChannelConfig& cfg) {
    Rng rng(cfg.seed);
    SymbolFrame<T> received = frame;
    ChannelReport report = transmit_symbols(received.symbols, cfg.kind, cfg.snr_db, rng);
    return {std::move(received), report};
}

template <class T>
std::pair<SymbolFrame<T>, ChannelReport> transmit(const SymbolFrame<T>& frame, ChannelKind kind, double snr_db,
                                                  Rng& rng) {
    SymbolFrame<T> received = frame;
    ChannelReport report = transmit_symbols(received.symbols, kind, snr_db, rng);
    return {std::move(received), report};
}

// ── training-time channel layer ─────────────────────────────────────────────
//
// Same forward math as transmit, but expressed on the real-pair feature
// matrices the training graph works with, with noise and h held constant for
// the backward pass. The layer has no trainable parameters.

struct TrainingChannelConfig {
    ChannelKind kind = ChannelKind::awgn;
    double snr_lo_db = 0.0;
    double snr_hi_db = 20.0;
};

struct ChannelDraw {
    double snr_db = 0.0;
    double sigma2 = 0.0;
    std::complex<double> h{1.0, 0.0};
};

inline ChannelDraw draw_channel(const TrainingChannelConfig& cfg, Rng& rng) {
    ChannelDraw d;
    d.snr_db = rng.uniform(cfg.snr_lo_db, cfg.snr_hi_db);
    d.sigma2 = noise_variance_for_snr_db(d.snr_db);
    if (cfg.kind == ChannelKind::rayleigh_slow) d.h = draw_fading_coefficient(rng);
    return d;
}

// Effective additive noise seen after zero-forcing, in the normalized symbol
// domain: n (awgn) or n/h (rayleigh). Rows pair-pack complex symbols.
template <class T>
Mat<T> draw_effective_noise(Eigen::Index rows, Eigen::Index cols, const ChannelDraw& d, ChannelKind kind, Rng& rng) {
    Mat<T> noise = Mat<T>::Zero(rows, cols);
    if (d.sigma2 <= 0.0) return noise;
    const double comp = std::sqrt(d.sigma2 / 2.0);
    if (kind == ChannelKind::awgn) {
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) noise(i, j) = static_cast<T>(comp * rng.normal());
        return noise;
    }
    const std::complex<double> inv_h = 1.0 / d.h;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j + 1 < cols; j += 2) {
            const std::complex<double> n(comp * rng.normal(), comp * rng.normal());
            const std::complex<double> eq = n * inv_h;
            noise(i, j) = static_cast<T>(eq.real());
            noise(i, j + 1) = static_cast<T>(eq.imag());
        }
    }
    return noise;
}

// Unequalized fading map y = h*x + noise on pair-packed reals; adjoint
// multiplies by conj(h). Noise and h are constants of the forward pass.
template <class T>
Mat<T> fade_add(const Mat<T>& x, std::complex<double> h, const Mat<T>& noise) {
    Mat<T> y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j + 1 < x.cols(); j += 2) {
            const std::complex<double> s(x(i, j), x(i, j + 1));
            const std::complex<double> out = h * s;
            y(i, j) = static_cast<T>(out.real());
            y(i, j + 1) = static_cast<T>(out.imag());
        }
    }
    return y + noise;
}

template <class T>
Mat<T> fade_add_backward(const Mat<T>& gy, std::complex<double> h) {
    const std::complex<double> hc = std::conj(h);
    Mat<T> gx(gy.rows(), gy.cols());
    for (Eigen::Index i = 0; i < gy.rows(); ++i) {
        for (Eigen::Index j = 0; j + 1 < gy.cols(); j += 2) {
            const std::complex<double> g(gy(i, j), gy(i, j + 1));
            const std::complex<double> out = hc * g;
            gx(i, j) = static_cast<T>(out.real());
            gx(i, j + 1) = static_cast<T>(out.imag());
        }
    }
    return gx;
}

}  // namespace semcom

#endif
