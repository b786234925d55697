#ifndef SEMCOM_PIPELINE_HPP
#define SEMCOM_PIPELINE_HPP

#include <cmath>
#include <optional>
#include <string>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/common.hpp"
#include "semcom/framing.hpp"
#include "semcom/image.hpp"
#include "semcom/metrics.hpp"
#include "semcom/symbols.hpp"
#include "semcom/task_model.hpp"
#include "semcom/weighting.hpp"

namespace semcom {

enum class WeightModelKind { entropy, task };

inline const char* weight_model_name(WeightModelKind k) { return k == WeightModelKind::entropy ? "entropy" : "task"; }

// Frozen pieces of one deployed link: the channel-robust codec, the
// channel-free embedding used as the similarity space, the downstream
// classifier, and the weight model inputs.
struct SemanticLink {
    const CodecModelF* codec = nullptr;
    const CodecModelF* embed = nullptr;
    const TaskModelF* task = nullptr;
    WeightModelKind weight_model = WeightModelKind::task;
    const CorpusStats* stats = nullptr;  // needed for entropy weights

    void validate() const {
        if (!codec || !embed) throw ConfigError("semantic link: codec and embed checkpoints required");
        if (weight_model == WeightModelKind::entropy && !stats)
            throw ConfigError("semantic link: entropy weights need corpus statistics");
        if (weight_model == WeightModelKind::task && !task)
            throw ConfigError("semantic link: task weights need the task model");
    }
};

inline WeightVector compute_weights(const SemanticLink& link, const Image& img, const MatF& features) {
    if (link.weight_model == WeightModelKind::entropy) return entropy_weights(features, *link.stats);
    return task_weights(*link.task, img, link.codec->cfg.grid_h(), link.codec->cfg.grid_w());
}

struct TransmissionOutcome {
    Image reconstructed;
    int n_kept = 0;
    long long payload_symbols = 0;
    double overhead = 0.0;  // equivalent symbols for header + bitmap side info
    ChannelReport report;
};

// Full transmit/receive of one image's pre-encoded features under a given
// bitmap. The frame passes through the byte-level wire format on every call,
// so the external format is exercised by every simulation.
inline TransmissionOutcome transmit_masked(const CodecModelF& codec, const MatF& features, const MaskBitmap& bitmap,
                                           ChannelKind kind, double snr_db, Rng& rng) {
    const int l = codec.cfg.token_count();
    if (static_cast<int>(bitmap.size()) != l) throw DimensionError("transmit_masked: bitmap length != token count");
    const int n = popcount(bitmap);
    MatF kept(n, features.cols());
    Eigen::Index next = 0;
    for (int i = 0; i < l; ++i)
        if (bitmap[static_cast<std::size_t>(i)]) kept.row(next++) = features.row(i);

    SymbolFrameF frame = features_to_symbols(kept, bitmap);
    SymbolFrameF parsed = deserialize(serialize(frame));

    TransmissionOutcome out;
    out.n_kept = n;
    out.payload_symbols = static_cast<long long>(n) * codec.cfg.symbols_per_feature();
    out.overhead = overhead_symbols(l, codec.cfg.symbols_per_feature());
    auto [received, report] = transmit(parsed, kind, snr_db, rng);
    out.report = report;
    MatF recovered = symbols_to_features(received);
    out.reconstructed = decode_image(codec, reconstruct_sequence(codec, recovered, bitmap), codec.cfg.image_h,
                                     codec.cfg.image_w);
    return out;
}

struct MaskDecision {
    MaskBitmap bitmap;
    double mu_used = std::numeric_limits<double>::quiet_NaN();  // threshold modes only
};

inline MaskDecision apply_policy(const WeightVector& weights, const MaskPolicy& policy) {
    MaskDecision d;
    if (policy.mode == MaskPolicy::Mode::threshold) {
        d.bitmap = select_threshold(weights, policy.mu);
        d.mu_used = policy.mu;
    } else {
        d.bitmap = select_topk(weights, policy.top_l);
    }
    return d;
}

// Per-image evaluation record shared by the sweep drivers.
struct ImageEval {
    int n_kept = 0;
    long long payload_symbols = 0;
    double overhead = 0.0;
    double mu_used = std::numeric_limits<double>::quiet_NaN();
    bool correct = false;
    double similarity = 0.0;
    double reconstruction_mse = 0.0;
};

inline ImageEval evaluate_transmission(const SemanticLink& link, const LabeledImage& sample, const MatF& features,
                                       const MaskDecision& decision, ChannelKind kind, double snr_db, Rng& rng) {
    TransmissionOutcome tx = transmit_masked(*link.codec, features, decision.bitmap, kind, snr_db, rng);
    ImageEval ev;
    ev.n_kept = tx.n_kept;
    ev.payload_symbols = tx.payload_symbols;
    ev.overhead = tx.overhead;
    ev.mu_used = decision.mu_used;
    if (link.task) ev.correct = (link.task->predict(tx.reconstructed) == sample.label);
    ev.similarity = semantic_similarity(*link.embed, sample.image, tx.reconstructed);
    ev.reconstruction_mse = mse(sample.image, tx.reconstructed);
    return ev;
}

}  // namespace semcom

#endif
