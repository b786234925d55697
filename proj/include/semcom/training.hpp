#ifndef SEMCOM_TRAINING_HPP
#define SEMCOM_TRAINING_HPP

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/common.hpp"
#include "semcom/dataset.hpp"
#include "semcom/image.hpp"
#include "semcom/nn.hpp"
#include "semcom/rng.hpp"
#include "semcom/symbols.hpp"

namespace semcom {

// ── differentiable transmit/receive middle ──────────────────────────────────
//
// Per image, between encoder output and decoder input:
//   gather kept rows K  →  power-normalize  →  channel  →  invert the scale
//   →  scatter with the mask token.
// With noise and fading held constant the noiseless path is exact identity on
// kept rows; with noise the recovered block is K + noise_eff/s(K), whose
// dependence on K through the recorded scale s is differentiated exactly.
template <class T>
struct MaskedChannelMiddle {
    MaskBitmap bitmap;
    Mat<T> noise_eff;  // n×d effective post-equalization noise; empty = noiseless
    // forward caches
    Mat<T> kept_;
    double inv_sqrt_p_ = 0.0;  // 1/sqrt(n*c)
    double norm_ = 0.0;        // ||K||_F

    // features: l×d for one image → decoder input l×d
    Mat<T> forward(const CodecModel<T>& model, const Mat<T>& features) {
        const int l = static_cast<int>(bitmap.size());
        const Eigen::Index d = features.cols();
        if (features.rows() != l) throw DimensionError("masked middle: feature rows != bitmap length");
        const int n = popcount(bitmap);
        kept_.resize(n, d);
        Eigen::Index next = 0;
        for (int i = 0; i < l; ++i)
            if (bitmap[static_cast<std::size_t>(i)]) kept_.row(next++) = features.row(i);

        Mat<T> recovered = kept_;
        if (noise_eff.size() > 0) {
            norm_ = std::sqrt(kept_.template cast<double>().squaredNorm());
            inv_sqrt_p_ = 1.0 / std::sqrt(static_cast<double>(n) * static_cast<double>(d) / 2.0);
            // K + noise_eff/s with s = 1/(norm*inv_sqrt_p)
            recovered += noise_eff * static_cast<T>(norm_ * inv_sqrt_p_);
        }

        Mat<T> out(l, d);
        next = 0;
        for (int i = 0; i < l; ++i) {
            if (bitmap[static_cast<std::size_t>(i)])
                out.row(i) = recovered.row(next++);
            else
                out.row(i) = model.mask_token().w.row(0);
        }
        return out;
    }

    // gZ: l×d → gradient w.r.t. the full feature sequence (zero at unsent
    // rows); accumulates the mask-token gradient.
    Mat<T> backward(CodecModel<T>& model, const Mat<T>& gz) {
        const int l = static_cast<int>(bitmap.size());
        const Eigen::Index d = gz.cols();
        Mat<T> grecv(kept_.rows(), d);
        Eigen::Index next = 0;
        for (int i = 0; i < l; ++i) {
            if (bitmap[static_cast<std::size_t>(i)])
                grecv.row(next++) = gz.row(i);
            else
                model.mask_token_param().g.row(0) += gz.row(i);
        }
        Mat<T> gkept = grecv;
        if (noise_eff.size() > 0 && norm_ > 0.0) {
            const double dot = grecv.template cast<double>().cwiseProduct(noise_eff.template cast<double>()).sum();
            gkept += kept_ * static_cast<T>(dot * inv_sqrt_p_ / norm_);
        }
        Mat<T> gfeatures = Mat<T>::Zero(l, d);
        next = 0;
        for (int i = 0; i < l; ++i)
            if (bitmap[static_cast<std::size_t>(i)]) gfeatures.row(i) = gkept.row(next++);
        return gfeatures;
    }
};

// ── codec training loop (pretraining and channel fine-tuning) ───────────────

struct CodecTrainConfig {
    int epochs = 12;
    int batch_size = 16;
    double lr = 1.5e-3;
    double grad_clip = 1.0;
    double mask_ratio_lo = 0.75;  // fraction of features masked; drawn per batch
    double mask_ratio_hi = 0.75;
    bool use_channel = false;
    TrainingChannelConfig channel;
    double val_fraction = 0.1;
    double val_mask_ratio = 0.75;  // fixed masked-reconstruction protocol for val MSE
};

struct CodecTrainStats {
    std::vector<double> epoch_train_loss;
    std::vector<double> epoch_val_mse;
    double first_epoch_val_mse = 0.0;
    double final_val_mse = 0.0;

    void write_csv(const std::string& path) const {
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("training curve: cannot open '" + path + "'");
        f << "epoch,train_loss,val_mse\n";
        for (std::size_t i = 0; i < epoch_train_loss.size(); ++i)
            f << (i + 1) << "," << epoch_train_loss[i] << "," << epoch_val_mse[i] << "\n";
    }
};

namespace detail {

inline MaskBitmap random_kept_bitmap(int l, int kept, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(l));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    MaskBitmap bits(static_cast<std::size_t>(l), 0);
    for (int k = 0; k < kept; ++k) bits[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 1;
    return bits;
}

inline int kept_count_for_ratio(int l, double mask_ratio) {
    const int kept = l - static_cast<int>(std::lround(mask_ratio * l));
    return std::min(l, std::max(1, kept));
}

}  // namespace detail

// Masked reconstruction MSE on held-out images, noiseless, with bitmaps fixed
// by (seed, image index) so runs stay comparable.
template <class T>
double masked_validation_mse(const CodecModel<T>& model, const std::vector<Mat<T>>& val_patches, double mask_ratio,
                             std::uint64_t seed) {
    const int l = model.cfg.token_count();
    const int kept = detail::kept_count_for_ratio(l, mask_ratio);
    double acc = 0.0;
    for (std::size_t i = 0; i < val_patches.size(); ++i) {
        Rng rng(derive_seed(seed, "val.mask", static_cast<std::uint64_t>(i)));
        MaskedChannelMiddle<T> middle;
        middle.bitmap = detail::random_kept_bitmap(l, kept, rng);
        Mat<T> features = model.encode(val_patches[i], 1);
        Mat<T> z = middle.forward(model, features);
        Mat<T> pred = model.decode(z, 1);
        acc += (pred - val_patches[i]).template cast<double>().squaredNorm() / static_cast<double>(pred.size());
    }
    return acc / static_cast<double>(val_patches.size());
}

// One optimization step over a batch; returns the batch loss. Exposed so the
// gradient check can drive the exact training graph with pinned noise.
template <class T>
double codec_train_step_loss(CodecModel<T>& model, const std::vector<const Mat<T>*>& batch_patches,
                             std::vector<MaskedChannelMiddle<T>>& middles, bool do_backward) {
    const int batch = static_cast<int>(batch_patches.size());
    const int l = model.cfg.token_count();
    const int dp = model.cfg.patch_dim();
    const int d = model.cfg.dim;
    Mat<T> patches(static_cast<Eigen::Index>(batch) * l, dp);
    for (int b = 0; b < batch; ++b) patches.middleRows(static_cast<Eigen::Index>(b) * l, l) = *batch_patches[static_cast<std::size_t>(b)];

    Mat<T> features = model.encode_train(patches, batch);
    Mat<T> z(static_cast<Eigen::Index>(batch) * l, d);
    for (int b = 0; b < batch; ++b)
        z.middleRows(static_cast<Eigen::Index>(b) * l, l) =
            middles[static_cast<std::size_t>(b)].forward(model, features.middleRows(static_cast<Eigen::Index>(b) * l, l));

    Mat<T> pred = model.decode_train(z, batch);
    Mat<T> diff = pred - patches;
    const double denom = static_cast<double>(diff.size());
    const double loss = diff.template cast<double>().squaredNorm() / denom;
    if (!do_backward) return loss;

    Mat<T> gpred = diff * static_cast<T>(2.0 / denom);
    Mat<T> gz = model.decode_train_backward(gpred);
    Mat<T> gfeatures(static_cast<Eigen::Index>(batch) * l, d);
    for (int b = 0; b < batch; ++b)
        gfeatures.middleRows(static_cast<Eigen::Index>(b) * l, l) =
            middles[static_cast<std::size_t>(b)].backward(model, gz.middleRows(static_cast<Eigen::Index>(b) * l, l));
    model.encode_train_backward(gfeatures);
    return loss;
}

// Shared trainer: pretraining is the noiseless fixed-ratio case, fine-tuning
// draws mask ratio and SNR per batch and routes kept features through the
// channel. The channel layer contributes no trainable parameters.
template <class T>
CodecTrainStats train_codec(CodecModel<T>& model, const std::vector<Mat<T>>& patch_data, const CodecTrainConfig& cfg,
                            std::uint64_t seed) {
    if (patch_data.size() < 8) throw DimensionError("train_codec: dataset too small");
    const int l = model.cfg.token_count();
    const int d = model.cfg.dim;
    const auto val_count = std::max<std::size_t>(4, static_cast<std::size_t>(cfg.val_fraction * patch_data.size()));
    const std::size_t fit_count = patch_data.size() - val_count;
    std::vector<Mat<T>> val_patches(patch_data.begin() + static_cast<std::ptrdiff_t>(fit_count), patch_data.end());

    auto params = model.params();
    nn::Adam<T> opt(params, cfg.lr);
    Rng rng(derive_seed(seed, "codec.train"));

    std::vector<std::size_t> order(fit_count);
    std::iota(order.begin(), order.end(), std::size_t{0});

    CodecTrainStats stats;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const int batch = static_cast<int>(end - start);
            const double ratio = (cfg.mask_ratio_hi > cfg.mask_ratio_lo)
                                     ? rng.uniform(cfg.mask_ratio_lo, cfg.mask_ratio_hi)
                                     : cfg.mask_ratio_lo;
            const int kept = detail::kept_count_for_ratio(l, ratio);

            std::vector<const Mat<T>*> batch_patches;
            std::vector<MaskedChannelMiddle<T>> middles(static_cast<std::size_t>(batch));
            ChannelDraw draw;
            if (cfg.use_channel) draw = draw_channel(cfg.channel, rng);
            for (int b = 0; b < batch; ++b) {
                batch_patches.push_back(&patch_data[order[start + static_cast<std::size_t>(b)]]);
                auto& mid = middles[static_cast<std::size_t>(b)];
                mid.bitmap = detail::random_kept_bitmap(l, kept, rng);
                if (cfg.use_channel)
                    mid.noise_eff = draw_effective_noise<T>(kept, d, draw, cfg.channel.kind, rng);
            }

            nn::zero_grads(params);
            epoch_loss += codec_train_step_loss(model, batch_patches, middles, true);
            ++batches;
            nn::clip_grad_norm(params, cfg.grad_clip);
            opt.step(params);
        }
        stats.epoch_train_loss.push_back(epoch_loss / std::max(1, batches));
        stats.epoch_val_mse.push_back(masked_validation_mse(model, val_patches, cfg.val_mask_ratio, seed));
    }
    stats.first_epoch_val_mse = stats.epoch_val_mse.front();
    stats.final_val_mse = stats.epoch_val_mse.back();
    if (stats.final_val_mse > stats.first_epoch_val_mse)
        throw TrainingFailure("train_codec: validation MSE did not improve over the budget (" +
                              std::to_string(stats.first_epoch_val_mse) + " -> " + std::to_string(stats.final_val_mse) +
                              ")");
    return stats;
}

template <class T>
std::vector<Mat<T>> patchify_dataset(const std::vector<LabeledImage>& data, int patch_size) {
    std::vector<Mat<T>> out;
    out.reserve(data.size());
    for (const auto& li : data) out.push_back(patchify<T>(li.image, patch_size));
    return out;
}

// Reconstruction MSE under full-feature transmission through a live channel;
// used to compare checkpoints at a fixed SNR.
template <class T>
double channel_reconstruction_mse(const CodecModel<T>& model, const std::vector<Mat<T>>& patches, ChannelKind kind,
                                  double snr_db, std::uint64_t seed, int replicates = 1) {
    const int l = model.cfg.token_count();
    double acc = 0.0;
    long long count = 0;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        Mat<T> features = model.encode(patches[i], 1);
        for (int r = 0; r < replicates; ++r) {
            Rng rng(derive_seed(seed, "chan_mse", i * 1000 + static_cast<std::uint64_t>(r)));
            SymbolFrame<T> frame = features_to_symbols(features, all_ones_bitmap(l));
            auto [received, report] = transmit(frame, kind, snr_db, rng);
            Mat<T> recovered = symbols_to_features(received);
            Mat<T> pred = model.decode(reconstruct_sequence(model, recovered, frame.bitmap), 1);
            acc += (pred - patches[i]).template cast<double>().squaredNorm() / static_cast<double>(pred.size());
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

}  // namespace semcom

#endif
