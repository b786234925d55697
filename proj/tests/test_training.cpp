#include <catch2/catch_amalgamated.hpp>

#include "semcom/codec.hpp"
#include "semcom/dataset.hpp"
#include "semcom/task_model.hpp"
#include "semcom/training.hpp"

using namespace semcom;

namespace {

CodecConfig tiny_cfg() {
    CodecConfig cfg;
    cfg.image_h = 16;
    cfg.image_w = 16;
    cfg.patch_size = 4;  // l = 16
    cfg.dim = 16;
    cfg.enc_blocks = 2;
    cfg.dec_blocks = 1;
    cfg.heads = 2;
    return cfg;
}

std::vector<Mat<float>> tiny_patches(int count, std::uint64_t seed) {
    auto data = generate_dataset(count, seed, 16, 16);
    return patchify_dataset<float>(data, 4);
}

}  // namespace

TEST_CASE("codec training reduces the validation MSE") {
    auto patches = tiny_patches(48, 1001);
    CodecModelF model(tiny_cfg(), 5);
    CodecTrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_size = 8;
    cfg.lr = 2e-3;
    auto stats = train_codec(model, patches, cfg, 77);
    INFO("val mse: first epoch " << stats.first_epoch_val_mse << " -> final " << stats.final_val_mse);
    REQUIRE(stats.final_val_mse < stats.first_epoch_val_mse);
    REQUIRE(stats.epoch_val_mse.size() == 8);
}

TEST_CASE("same master seed reproduces the identical checkpoint digest") {
    auto patches = tiny_patches(32, 1002);
    CodecTrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;

    CodecModelF a(tiny_cfg(), 5);
    train_codec(a, patches, cfg, 123);
    CodecModelF b(tiny_cfg(), 5);
    train_codec(b, patches, cfg, 123);
    REQUIRE(codec_checkpoint_archive(a, {}).digest() == codec_checkpoint_archive(b, {}).digest());

    CodecModelF c(tiny_cfg(), 5);
    train_codec(c, patches, cfg, 124);
    REQUIRE(codec_checkpoint_archive(a, {}).digest() != codec_checkpoint_archive(c, {}).digest());
}

TEST_CASE("masking ratio 0 degenerates to a plain autoencoder with lower validation MSE") {
    auto patches = tiny_patches(48, 1003);
    CodecTrainConfig plain;
    plain.epochs = 6;
    plain.batch_size = 8;
    plain.mask_ratio_lo = plain.mask_ratio_hi = 0.0;
    plain.val_mask_ratio = 0.0;
    CodecModelF ae(tiny_cfg(), 6);
    auto ae_stats = train_codec(ae, patches, plain, 55);

    CodecTrainConfig masked = plain;
    masked.mask_ratio_lo = masked.mask_ratio_hi = 0.75;
    masked.val_mask_ratio = 0.75;
    CodecModelF mae(tiny_cfg(), 6);
    auto mae_stats = train_codec(mae, patches, masked, 55);

    INFO("plain AE val " << ae_stats.final_val_mse << " vs masked " << mae_stats.final_val_mse);
    REQUIRE(ae_stats.final_val_mse <= mae_stats.final_val_mse);
}

TEST_CASE("channel fine-tuning leaves the parameter count unchanged") {
    auto patches = tiny_patches(32, 1004);
    CodecModelF model(tiny_cfg(), 7);
    const std::size_t before = model.param_count();

    CodecTrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.mask_ratio_lo = 0.25;
    cfg.mask_ratio_hi = 0.75;
    cfg.use_channel = true;
    cfg.channel = {ChannelKind::awgn, 0.0, 20.0};
    train_codec(model, patches, cfg, 88);
    REQUIRE(model.param_count() == before);
}

TEST_CASE("masked middle forward equals the frame path when noiseless") {
    // dual route: the training middle must compute the same numbers as
    // features_to_symbols -> transmit(noiseless) -> symbols_to_features
    CodecModelF model(tiny_cfg(), 8);
    auto patches = tiny_patches(1, 1005);
    MatF features = model.encode(patches[0], 1);

    MaskBitmap bm(16, 0);
    for (int i : {0, 3, 7, 8, 12}) bm[static_cast<std::size_t>(i)] = 1;
    MaskedChannelMiddle<float> middle;
    middle.bitmap = bm;
    MatF z = middle.forward(model, features);

    MatF kept(5, 16);
    Eigen::Index next = 0;
    for (int i = 0; i < 16; ++i)
        if (bm[static_cast<std::size_t>(i)]) kept.row(next++) = features.row(i);
    SymbolFrameF frame = features_to_symbols(kept, bm);
    Rng rng(1);
    auto [received, report] = transmit(frame, ChannelKind::awgn, kNoiselessSnrDb, rng);
    MatF recovered = symbols_to_features(received);
    MatF z_ref = reconstruct_sequence(model, recovered, bm);
    REQUIRE((z - z_ref).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("masked middle with pinned noise matches the frame path at matched scale") {
    // with noise: middle adds noise_eff/scale; the frame path adds noise to
    // the normalized symbols then divides by the same scale
    CodecModelF model(tiny_cfg(), 9);
    auto patches = tiny_patches(1, 1006);
    MatF features = model.encode(patches[0], 1);
    MaskBitmap bm = all_ones_bitmap(16);

    ChannelDraw draw;
    draw.sigma2 = noise_variance_for_snr_db(10.0);
    Rng noise_rng(2024);
    MatF noise = draw_effective_noise<float>(16, 16, draw, ChannelKind::awgn, noise_rng);

    MaskedChannelMiddle<float> middle;
    middle.bitmap = bm;
    middle.noise_eff = noise;
    MatF z = middle.forward(model, features);

    SymbolFrameF frame = features_to_symbols(features, bm);
    for (Eigen::Index i = 0; i < frame.symbols.rows(); ++i)
        for (Eigen::Index j = 0; j < frame.symbols.cols(); ++j)
            frame.symbols(i, j) += std::complex<float>(noise(i, 2 * j), noise(i, 2 * j + 1));
    MatF recovered = symbols_to_features(frame);
    REQUIRE((z - recovered).cwiseAbs().maxCoeff() < 1e-5f);
}

TEST_CASE("task model trains to the accuracy gate on the synthetic set") {
    auto data = generate_dataset(1280, 2026);
    TaskModelConfig cfg;
    TaskTrainConfig train_cfg;
    double val_acc = 0.0;
    TaskModelF model = train_task_model<float>(data, cfg, 99, train_cfg, &val_acc);
    INFO("task val accuracy " << val_acc);
    REQUIRE(val_acc >= 0.95);

    // frozen-model contract: repeated inference is bit-stable
    const Image& img = data[0].image;
    VecF z1 = model.logits(img);
    VecF z2 = model.logits(img);
    REQUIRE(z1 == z2);

    // chance-level accuracy on shuffled labels
    std::vector<Image> images;
    std::vector<int> shuffled;
    for (std::size_t i = 0; i < 200; ++i) {
        images.push_back(data[i].image);
        shuffled.push_back(static_cast<int>((data[i].label + 1 + i % 9) % 10));  // derangement-ish
    }
    const double chance = task_metric(model, images, shuffled);
    INFO("shuffled-label accuracy " << chance);
    REQUIRE(chance < 0.2);

    // accuracy bounds and length mismatch
    std::vector<int> labels;
    for (std::size_t i = 0; i < 200; ++i) labels.push_back(data[i].label);
    const double acc = task_metric(model, images, labels);
    REQUIRE(acc >= 0.9);
    REQUIRE(acc <= 1.0);
    labels.pop_back();
    CHECK_THROWS_AS(task_metric(model, images, labels), DimensionError);

    // checkpoint round trip preserves behavior
    const std::string path = "task_roundtrip.bin";
    save_task_checkpoint(model, path, {{"val_accuracy", val_acc}});
    auto [loaded, manifest] = load_task_checkpoint<float>(path);
    REQUIRE(manifest.at("val_accuracy") == Catch::Approx(val_acc));
    REQUIRE(loaded.predict(img) == model.predict(img));
    std::remove(path.c_str());
}

TEST_CASE("training failure surfaces when the gate is unreachable") {
    auto data = generate_dataset(40, 3);
    TaskModelConfig cfg;
    TaskTrainConfig train_cfg;
    train_cfg.epochs = 0;  // untrained model cannot reach the gate
    CHECK_THROWS_AS(train_task_model<float>(data, cfg, 1, train_cfg), TrainingFailure);
}
