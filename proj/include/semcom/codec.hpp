#ifndef SEMCOM_CODEC_HPP
#define SEMCOM_CODEC_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "semcom/archive.hpp"
#include "semcom/common.hpp"
#include "semcom/image.hpp"
#include "semcom/nn.hpp"
#include "semcom/rng.hpp"
#include "semcom/symbols.hpp"

namespace semcom {

// Transformer masked-autoencoder codec: the encoder maps every patch to one
// semantic feature; the decoder rebuilds the full sequence from a kept subset
// plus a learned mask token and maps it back to pixel space.
struct CodecConfig {
    int image_h = 32;
    int image_w = 32;
    int patch_size = 4;
    int dim = 64;        // feature width d (even; multiple of 4 for positions)
    int enc_blocks = 4;
    int dec_blocks = 2;
    int heads = 4;
    int mlp_ratio = 4;

    int grid_h() const { return image_h / patch_size; }
    int grid_w() const { return image_w / patch_size; }
    int token_count() const { return grid_h() * grid_w(); }        // l
    int patch_dim() const { return 3 * patch_size * patch_size; }  // d_p
    int symbols_per_feature() const { return dim / 2; }            // c

    void validate() const {
        check_patch_geometry(image_h, image_w, patch_size, "codec config");
        if (dim % 4 != 0) throw DimensionError("codec config: dim must be a multiple of 4");
        if (dim % heads != 0) throw DimensionError("codec config: heads must divide dim");
        if (enc_blocks < 1 || dec_blocks < 1) throw DimensionError("codec config: need at least one block per side");
    }

    nlohmann::json to_json() const {
        return {{"image_h", image_h}, {"image_w", image_w}, {"patch_size", patch_size}, {"dim", dim},
                {"enc_blocks", enc_blocks}, {"dec_blocks", dec_blocks}, {"heads", heads}, {"mlp_ratio", mlp_ratio}};
    }

    static CodecConfig from_json(const nlohmann::json& j) {
        CodecConfig c;
        c.image_h = j.at("image_h");
        c.image_w = j.at("image_w");
        c.patch_size = j.at("patch_size");
        c.dim = j.at("dim");
        c.enc_blocks = j.at("enc_blocks");
        c.dec_blocks = j.at("dec_blocks");
        c.heads = j.at("heads");
        c.mlp_ratio = j.at("mlp_ratio");
        return c;
    }
};

template <class T>
class CodecModel {
   public:
    CodecConfig cfg;

    CodecModel() = default;

    explicit CodecModel(const CodecConfig& config, std::uint64_t init_seed) { init(config, init_seed); }

    void init(const CodecConfig& config, std::uint64_t init_seed) {
        config.validate();
        cfg = config;
        Rng rng(init_seed);
        const int d = cfg.dim;
        const int hidden = cfg.mlp_ratio * d;
        patch_embed_.init(cfg.patch_dim(), d, rng);
        enc_.resize(cfg.enc_blocks);
        for (auto& b : enc_) b.init(d, cfg.heads, hidden, rng);
        enc_norm_.init(d);
        mask_token_.setup(1, d);
        rng.fill_normal(mask_token_.w, 0.02);
        dec_.resize(cfg.dec_blocks);
        for (auto& b : dec_) b.init(d, cfg.heads, hidden, rng);
        dec_norm_.init(d);
        head_.init(d, cfg.patch_dim(), rng);
        pos_enc_ = nn::sincos_position_table<T>(cfg.grid_h(), cfg.grid_w(), d);
        pos_dec_ = nn::sincos_position_table<T>(cfg.grid_h(), cfg.grid_w(), d);
        initialized_ = true;
    }

    bool initialized() const { return initialized_; }
    const nn::Param<T>& mask_token() const { return require_init(), mask_token_; }
    nn::Param<T>& mask_token_param() { return mask_token_; }

    nn::NamedParams<T> params() {
        nn::NamedParams<T> out;
        patch_embed_.collect("patch_embed", out);
        for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].collect("enc." + std::to_string(i), out);
        enc_norm_.collect("enc_norm", out);
        out.emplace_back("mask_token", &mask_token_);
        for (std::size_t i = 0; i < dec_.size(); ++i) dec_[i].collect("dec." + std::to_string(i), out);
        dec_norm_.collect("dec_norm", out);
        head_.collect("head", out);
        return out;
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (auto& [name, p] : params()) n += static_cast<std::size_t>(p->size());
        return n;
    }

    // ── inference (const, cache-free, safe for concurrent use) ──────────────

    // patches: (batch*l) × d_p → features (batch*l) × d
    Mat<T> encode(const Mat<T>& patches, int batch = 1) const {
        require_init();
        check_token_rows(patches, batch, cfg.patch_dim(), "encode");
        Mat<T> x = patch_embed_.apply(patches);
        add_positions(x, pos_enc_, batch);
        for (const auto& b : enc_) x = b.apply(x, cfg.token_count());
        return enc_norm_.apply(x);
    }

    // scattered token sequence (batch*l) × d → reconstructed patches (batch*l) × d_p
    Mat<T> decode(const Mat<T>& seq, int batch = 1) const {
        require_init();
        check_token_rows(seq, batch, cfg.dim, "decode");
        Mat<T> z = seq;
        add_positions(z, pos_dec_, batch);
        for (const auto& b : dec_) z = b.apply(z, cfg.token_count());
        return head_.apply(dec_norm_.apply(z));
    }

    // ── training-mode forward/backward (caches activations) ─────────────────

    Mat<T> encode_train(const Mat<T>& patches, int batch) {
        require_init();
        check_token_rows(patches, batch, cfg.patch_dim(), "encode_train");
        Mat<T> x = patch_embed_.forward(patches);
        add_positions(x, pos_enc_, batch);
        for (auto& b : enc_) x = b.forward(x, cfg.token_count());
        return enc_norm_.forward(x);
    }

    Mat<T> encode_train_backward(const Mat<T>& gfeatures) {
        Mat<T> g = enc_norm_.backward(gfeatures);
        for (auto it = enc_.rbegin(); it != enc_.rend(); ++it) g = it->backward(g);
        return patch_embed_.backward(g);
    }

    Mat<T> decode_train(const Mat<T>& seq, int batch) {
        require_init();
        check_token_rows(seq, batch, cfg.dim, "decode_train");
        Mat<T> z = seq;
        add_positions(z, pos_dec_, batch);
        for (auto& b : dec_) z = b.forward(z, cfg.token_count());
        return head_.forward(dec_norm_.forward(z));
    }

    Mat<T> decode_train_backward(const Mat<T>& gpatches) {
        Mat<T> g = dec_norm_.backward(head_.backward(gpatches));
        for (auto it = dec_.rbegin(); it != dec_.rend(); ++it) g = it->backward(g);
        return g;
    }

   private:
    bool initialized_ = false;
    nn::Linear<T> patch_embed_;
    std::vector<nn::TransformerBlock<T>> enc_;
    nn::LayerNorm<T> enc_norm_;
    nn::Param<T> mask_token_;
    std::vector<nn::TransformerBlock<T>> dec_;
    nn::LayerNorm<T> dec_norm_;
    nn::Linear<T> head_;
    Mat<T> pos_enc_, pos_dec_;

    void require_init() const {
        if (!initialized_) throw Error("codec: model not initialized");
    }

    void check_token_rows(const Mat<T>& m, int batch, int want_cols, const char* who) const {
        if (batch < 1 || m.rows() != static_cast<Eigen::Index>(batch) * cfg.token_count())
            throw DimensionError(std::string(who) + ": row count != batch * token_count");
        if (m.cols() != want_cols) throw DimensionError(std::string(who) + ": unexpected column count");
    }

    void add_positions(Mat<T>& x, const Mat<T>& table, int batch) const {
        const int l = cfg.token_count();
        for (int b = 0; b < batch; ++b) x.middleRows(static_cast<Eigen::Index>(b) * l, l) += table;
    }
};

using CodecModelF = CodecModel<float>;

// ── spec-facing operations ───────────────────────────────────────────────────

template <class T>
Mat<T> encode_features(const CodecModel<T>& model, const Mat<T>& patches) {
    if (patches.rows() != model.cfg.token_count())
        throw DimensionError("encode_features: patch count != token count");
    return model.encode(patches, 1);
}

// Scatter the received features back to full length: position i holds the next
// received row when bitmap[i] = 1, else the learned mask token. Positions are
// re-attached by the decoder.
template <class T>
Mat<T> reconstruct_sequence(const CodecModel<T>& model, const Mat<T>& received, const MaskBitmap& bitmap) {
    const int l = static_cast<int>(bitmap.size());
    if (popcount(bitmap) != static_cast<int>(received.rows()))
        throw DimensionError("reconstruct_sequence: popcount(bitmap) != received row count");
    if (received.cols() != model.cfg.dim) throw DimensionError("reconstruct_sequence: feature width != dim");
    Mat<T> out(l, model.cfg.dim);
    Eigen::Index next = 0;
    for (int i = 0; i < l; ++i) {
        if (bitmap[static_cast<std::size_t>(i)])
            out.row(i) = received.row(next++);
        else
            out.row(i) = model.mask_token().w.row(0);
    }
    return out;
}

template <class T>
Image decode_image(const CodecModel<T>& model, const Mat<T>& seq, int h, int w) {
    if (h != model.cfg.image_h || w != model.cfg.image_w)
        throw DimensionError("decode_image: geometry differs from model config");
    if (seq.rows() != model.cfg.token_count()) throw DimensionError("decode_image: sequence length != token count");
    Mat<T> patches = model.decode(seq, 1);
    return clamp_to_image(patches, h, w);
}

// ── checkpoints ──────────────────────────────────────────────────────────────

inline constexpr int kCodecCheckpointVersion = 1;

template <class T>
Archive codec_checkpoint_archive(CodecModel<T>& model, const nlohmann::json& extra) {
    Archive a;
    a.manifest["kind"] = "codec_checkpoint";
    a.manifest["format_version"] = kCodecCheckpointVersion;
    a.manifest["config"] = model.cfg.to_json();
    for (auto& [key, value] : extra.items()) a.manifest[key] = value;
    for (auto& [name, p] : model.params()) {
        Mat<float> w = p->w.template cast<float>();
        a.add(name, w);
    }
    return a;
}

template <class T>
void save_codec_checkpoint(CodecModel<T>& model, const std::string& path, const nlohmann::json& extra) {
    codec_checkpoint_archive(model, extra).save(path);
}

template <class T = float>
std::pair<CodecModel<T>, nlohmann::json> load_codec_checkpoint(const std::string& path) {
    Archive a = Archive::load(path);
    if (a.manifest.value("kind", "") != "codec_checkpoint") throw IoError("codec checkpoint: wrong archive kind");
    if (a.manifest.value("format_version", 0) != kCodecCheckpointVersion)
        throw IoError("codec checkpoint: unsupported format version");
    CodecModel<T> model(CodecConfig::from_json(a.manifest.at("config")), /*init_seed=*/0);
    for (auto& [name, p] : model.params()) {
        Mat<float> w = a.get_mat<float>(name);
        if (w.rows() != p->w.rows() || w.cols() != p->w.cols())
            throw IoError("codec checkpoint: shape mismatch for '" + name + "'");
        p->w = w.template cast<T>();
    }
    return {std::move(model), a.manifest};
}

}  // namespace semcom

#endif
