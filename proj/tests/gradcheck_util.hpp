#ifndef SEMCOM_TESTS_GRADCHECK_UTIL_HPP
#define SEMCOM_TESTS_GRADCHECK_UTIL_HPP

#include <cmath>
#include <functional>
#include <string>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/nn.hpp"
#include "semcom/rng.hpp"
#include "semcom/training.hpp"

namespace semcom::testutil {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    long long checked = 0;
};

// Central-difference check of every parameter element against the analytic
// gradients accumulated by one backward pass. loss_fn must be a pure
// function of the current parameter values.
template <class T>
GradCheckReport check_param_gradients(const nn::NamedParams<T>& params, const std::function<double()>& loss_fn,
                                      double fd_step) {
    GradCheckReport report;
    for (auto& [name, p] : params) {
        for (Eigen::Index i = 0; i < p->w.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->w.cols(); ++j) {
                const T saved = p->w(i, j);
                p->w(i, j) = saved + static_cast<T>(fd_step);
                const double lp = loss_fn();
                p->w(i, j) = saved - static_cast<T>(fd_step);
                const double lm = loss_fn();
                p->w(i, j) = saved;
                const double fd = (lp - lm) / (2.0 * fd_step);
                const double an = static_cast<double>(p->g(i, j));
                // denominator floor absorbs central-difference roundoff noise
                // (~1e-9 for O(1) losses) on structurally-zero gradients
                const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-4});
                ++report.checked;
                if (rel > report.max_rel_err) {
                    report.max_rel_err = rel;
                    report.worst_param = name;
                }
            }
        }
    }
    return report;
}

// The acceptance-pinned toy model: a 2-patch, d=4 codec trained graph with a
// fixed mask and pinned channel noise; returns the worst relative error of
// analytic vs central-difference gradients over every parameter.
inline GradCheckReport toy_codec_gradcheck(bool with_channel_noise) {
    CodecConfig cfg;
    cfg.image_h = 4;
    cfg.image_w = 8;
    cfg.patch_size = 4;  // l = 2
    cfg.dim = 4;
    cfg.enc_blocks = 1;
    cfg.dec_blocks = 1;
    cfg.heads = 2;
    cfg.mlp_ratio = 4;
    CodecModel<double> model(cfg, 20260101);

    Rng rng(42);
    Mat<double> patches(2, cfg.patch_dim());
    rng.fill_normal(patches, 0.5);
    patches = patches.cwiseAbs().cwiseMin(1.0);  // pixel-like values

    MaskedChannelMiddle<double> middle;
    middle.bitmap = MaskBitmap{1, 0};
    if (with_channel_noise) {
        // fixed rayleigh draw: noise and h are constants of the forward pass
        ChannelDraw draw;
        draw.sigma2 = noise_variance_for_snr_db(8.0);
        draw.h = {0.6, -0.5};
        middle.noise_eff = draw_effective_noise<double>(1, cfg.dim, draw, ChannelKind::rayleigh_slow, rng);
    }

    std::vector<const Mat<double>*> batch{&patches};
    std::vector<MaskedChannelMiddle<double>> middles{middle};

    auto params = model.params();
    nn::zero_grads(params);
    codec_train_step_loss(model, batch, middles, true);
    auto loss_fn = [&]() {
        auto mids = middles;
        return codec_train_step_loss(model, batch, mids, false);
    };
    return check_param_gradients<double>(params, loss_fn, 1e-5);
}

}  // namespace semcom::testutil

#endif
