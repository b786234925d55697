#ifndef SEMCOM_TASK_MODEL_HPP
#define SEMCOM_TASK_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcom/archive.hpp"
#include "semcom/common.hpp"
#include "semcom/dataset.hpp"
#include "semcom/image.hpp"
#include "semcom/nn.hpp"
#include "semcom/rng.hpp"
#include "semcom/weighting.hpp"

namespace semcom {

// Frozen downstream classifier standing in for a detection model: three 3×3
// conv stages (two with 2×2 max-pooling) and a linear head. The last conv
// activation map doubles as the importance signal for the task weight model.
namespace cnn {

// Feature maps are stored channels × (H*W), row-major, one channel per row.
template <class T>
Mat<T> im2col3x3(const Mat<T>& x, int h, int w) {
    const Eigen::Index c_in = x.rows();
    Mat<T> cols = Mat<T>::Zero(c_in * 9, static_cast<Eigen::Index>(h) * w);
    for (Eigen::Index c = 0; c < c_in; ++c) {
        for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
                const Eigen::Index row = c * 9 + static_cast<Eigen::Index>(ky + 1) * 3 + (kx + 1);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky;
                    if (sy < 0 || sy >= h) continue;
                    for (int x2 = 0; x2 < w; ++x2) {
                        const int sx = x2 + kx;
                        if (sx < 0 || sx >= w) continue;
                        cols(row, static_cast<Eigen::Index>(y) * w + x2) = x(c, static_cast<Eigen::Index>(sy) * w + sx);
                    }
                }
            }
        }
    }
    return cols;
}

template <class T>
Mat<T> col2im3x3(const Mat<T>& gcols, Eigen::Index c_in, int h, int w) {
    Mat<T> gx = Mat<T>::Zero(c_in, static_cast<Eigen::Index>(h) * w);
    for (Eigen::Index c = 0; c < c_in; ++c) {
        for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
                const Eigen::Index row = c * 9 + static_cast<Eigen::Index>(ky + 1) * 3 + (kx + 1);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky;
                    if (sy < 0 || sy >= h) continue;
                    for (int x2 = 0; x2 < w; ++x2) {
                        const int sx = x2 + kx;
                        if (sx < 0 || sx >= w) continue;
                        gx(c, static_cast<Eigen::Index>(sy) * w + sx) += gcols(row, static_cast<Eigen::Index>(y) * w + x2);
                    }
                }
            }
        }
    }
    return gx;
}

// 3×3 same-padding convolution, stride 1.
template <class T>
struct Conv3x3 {
    nn::Param<T> W;  // out_ch × in_ch*9
    nn::Param<T> b;  // 1 × out_ch

    void init(int in_ch, int out_ch, Rng& rng) {
        W.setup(out_ch, static_cast<Eigen::Index>(in_ch) * 9);
        b.setup(1, out_ch);
        rng.fill_normal(W.w, std::sqrt(2.0 / (in_ch * 9)));
    }

    Mat<T> apply(const Mat<T>& x, int h, int w) const {
        Mat<T> cols = im2col3x3(x, h, w);
        Mat<T> y = W.w * cols;
        y.colwise() += b.w.row(0).transpose();
        return y;
    }

    Mat<T> forward(const Mat<T>& x, int h, int w) {
        h_ = h;
        w_ = w;
        in_ch_ = x.rows();
        cols_ = im2col3x3(x, h, w);
        Mat<T> y = W.w * cols_;
        y.colwise() += b.w.row(0).transpose();
        return y;
    }

    Mat<T> backward(const Mat<T>& gy) {
        W.g.noalias() += gy * cols_.transpose();
        b.g.row(0) += gy.rowwise().sum().transpose();
        Mat<T> gcols = W.w.transpose() * gy;
        return col2im3x3(gcols, in_ch_, h_, w_);
    }

    void collect(const std::string& prefix, nn::NamedParams<T>& out) {
        out.emplace_back(prefix + ".W", &W);
        out.emplace_back(prefix + ".b", &b);
    }

   private:
    Mat<T> cols_;
    Eigen::Index in_ch_ = 0;
    int h_ = 0, w_ = 0;
};

template <class T>
struct Relu {
    Mat<T> apply(const Mat<T>& x) const { return x.cwiseMax(T(0)); }
    Mat<T> forward(const Mat<T>& x) {
        mask_ = (x.array() > T(0)).template cast<T>();
        return x.cwiseMax(T(0));
    }
    Mat<T> backward(const Mat<T>& gy) { return gy.cwiseProduct(mask_); }

   private:
    Mat<T> mask_;
};

template <class T>
struct MaxPool2 {
    Mat<T> apply(const Mat<T>& x, int h, int w) const {
        std::vector<Eigen::Index> scratch;
        return pool(x, h, w, scratch);
    }
    Mat<T> forward(const Mat<T>& x, int h, int w) {
        in_h_ = h;
        in_w_ = w;
        in_cols_ = x.cols();
        return pool(x, h, w, argmax_);
    }
    Mat<T> backward(const Mat<T>& gy) {
        Mat<T> gx = Mat<T>::Zero(gy.rows(), in_cols_);
        const Eigen::Index out_hw = gy.cols();
        for (Eigen::Index c = 0; c < gy.rows(); ++c)
            for (Eigen::Index i = 0; i < out_hw; ++i) gx(c, argmax_[static_cast<std::size_t>(c * out_hw + i)]) += gy(c, i);
        return gx;
    }

   private:
    std::vector<Eigen::Index> argmax_;
    int in_h_ = 0, in_w_ = 0;
    Eigen::Index in_cols_ = 0;

    template <class Store>
    Mat<T> pool(const Mat<T>& x, int h, int w, Store& argmax) const {
        const int oh = h / 2, ow = w / 2;
        Mat<T> y(x.rows(), static_cast<Eigen::Index>(oh) * ow);
        argmax.resize(static_cast<std::size_t>(x.rows()) * oh * ow);
        for (Eigen::Index c = 0; c < x.rows(); ++c) {
            for (int y2 = 0; y2 < oh; ++y2) {
                for (int x2 = 0; x2 < ow; ++x2) {
                    T best = x(c, static_cast<Eigen::Index>(2 * y2) * w + 2 * x2);
                    Eigen::Index best_idx = static_cast<Eigen::Index>(2 * y2) * w + 2 * x2;
                    for (int dy = 0; dy < 2; ++dy) {
                        for (int dx = 0; dx < 2; ++dx) {
                            const Eigen::Index idx = static_cast<Eigen::Index>(2 * y2 + dy) * w + 2 * x2 + dx;
                            if (x(c, idx) > best) {
                                best = x(c, idx);
                                best_idx = idx;
                            }
                        }
                    }
                    y(c, static_cast<Eigen::Index>(y2) * ow + x2) = best;
                    argmax[static_cast<std::size_t>(c * oh * ow + y2 * ow + x2)] = best_idx;
                }
            }
        }
        return y;
    }
};

}  // namespace cnn

struct TaskModelConfig {
    int image_h = 32, image_w = 32;
    int c1 = 12, c2 = 24, c3 = 24;
    int classes = 10;

    int map_h() const { return image_h / 4; }
    int map_w() const { return image_w / 4; }

    nlohmann::json to_json() const {
        return {{"image_h", image_h}, {"image_w", image_w}, {"c1", c1}, {"c2", c2}, {"c3", c3}, {"classes", classes}};
    }
    static TaskModelConfig from_json(const nlohmann::json& j) {
        TaskModelConfig c;
        c.image_h = j.at("image_h");
        c.image_w = j.at("image_w");
        c.c1 = j.at("c1");
        c.c2 = j.at("c2");
        c.c3 = j.at("c3");
        c.classes = j.at("classes");
        return c;
    }
};

template <class T>
class TaskModel {
   public:
    TaskModelConfig cfg;

    TaskModel() = default;
    TaskModel(const TaskModelConfig& config, std::uint64_t init_seed) { init(config, init_seed); }

    void init(const TaskModelConfig& config, std::uint64_t init_seed) {
        cfg = config;
        Rng rng(init_seed);
        conv1_.init(3, cfg.c1, rng);
        conv2_.init(cfg.c1, cfg.c2, rng);
        conv3_.init(cfg.c2, cfg.c3, rng);
        fc_.init(cfg.c3 * cfg.map_h() * cfg.map_w(), cfg.classes, rng);
        initialized_ = true;
    }

    bool initialized() const { return initialized_; }

    nn::NamedParams<T> params() {
        nn::NamedParams<T> out;
        conv1_.collect("conv1", out);
        conv2_.collect("conv2", out);
        conv3_.collect("conv3", out);
        fc_.collect("fc", out);
        return out;
    }

    // pixels centered to [-1, 1]; zero-mean inputs train markedly faster
    static Mat<T> to_input(const Image& img) {
        Mat<T> x(3, static_cast<Eigen::Index>(img.height) * img.width);
        for (int y = 0; y < img.height; ++y)
            for (int x2 = 0; x2 < img.width; ++x2)
                for (int c = 0; c < 3; ++c)
                    x(c, static_cast<Eigen::Index>(y) * img.width + x2) =
                        static_cast<T>(2.0 * img.at(y, x2, c) - 1.0);
        return x;
    }

    // class scores (pure inference)
    Vec<T> logits(const Image& img) const {
        require_init();
        Mat<T> act;
        return logits_and_map(img, act);
    }

    int predict(const Image& img) const {
        const Vec<T> z = logits(img);
        int best = 0;
        for (int k = 1; k < cfg.classes; ++k)
            if (z(k) > z(best)) best = k;  // ties go to the lower class id
        return best;
    }

    // mean activation magnitude of the last conv stage, map_h × map_w
    Mat<double> activation_map(const Image& img) const {
        require_init();
        Mat<T> act;
        logits_and_map(img, act);
        Mat<double> m = Mat<double>::Zero(cfg.map_h(), cfg.map_w());
        for (Eigen::Index c = 0; c < act.rows(); ++c)
            for (int y = 0; y < cfg.map_h(); ++y)
                for (int x = 0; x < cfg.map_w(); ++x)
                    m(y, x) += std::abs(static_cast<double>(act(c, static_cast<Eigen::Index>(y) * cfg.map_w() + x)));
        return m / static_cast<double>(act.rows());
    }

    // ── training path ────────────────────────────────────────────────────────

    Vec<T> forward_train(const Mat<T>& input) {
        require_init();
        const int h = cfg.image_h, w = cfg.image_w;
        Mat<T> a = relu1_.forward(conv1_.forward(input, h, w));
        a = pool1_.forward(a, h, w);
        a = relu2_.forward(conv2_.forward(a, h / 2, w / 2));
        a = pool2_.forward(a, h / 2, w / 2);
        a = relu3_.forward(conv3_.forward(a, h / 4, w / 4));
        flat_rows_ = a.rows();
        flat_cols_ = a.cols();
        Mat<T> flat(1, a.size());
        Eigen::Map<Mat<T>>(flat.data(), a.rows(), a.cols()) = a;
        return fc_.forward(flat).row(0).transpose();
    }

    void backward_train(const Vec<T>& glogits) {
        Mat<T> g(1, glogits.size());
        g.row(0) = glogits.transpose();
        Mat<T> gflat = fc_.backward(g);
        Mat<T> ga = Eigen::Map<Mat<T>>(gflat.data(), flat_rows_, flat_cols_);
        ga = conv3_.backward(relu3_.backward(ga));
        ga = pool2_.backward(ga);
        ga = conv2_.backward(relu2_.backward(ga));
        ga = pool1_.backward(ga);
        conv1_.backward(relu1_.backward(ga));
    }

   private:
    bool initialized_ = false;
    cnn::Conv3x3<T> conv1_, conv2_, conv3_;
    cnn::Relu<T> relu1_, relu2_, relu3_;
    cnn::MaxPool2<T> pool1_, pool2_;
    nn::Linear<T> fc_;
    Eigen::Index flat_rows_ = 0, flat_cols_ = 0;

    void require_init() const {
        if (!initialized_) throw Error("task model: not initialized");
    }

    Vec<T> logits_and_map(const Image& img, Mat<T>& last_act) const {
        if (img.height != cfg.image_h || img.width != cfg.image_w)
            throw DimensionError("task model: image geometry mismatch");
        const int h = cfg.image_h, w = cfg.image_w;
        Mat<T> a = conv1_.apply(to_input(img), h, w).cwiseMax(T(0));
        a = pool1_.apply(a, h, w);
        a = conv2_.apply(a, h / 2, w / 2).cwiseMax(T(0));
        a = pool2_.apply(a, h / 2, w / 2);
        last_act = conv3_.apply(a, h / 4, w / 4).cwiseMax(T(0));
        Mat<T> flat(1, last_act.size());
        Eigen::Map<Mat<T>>(flat.data(), last_act.rows(), last_act.cols()) = last_act;
        return fc_.apply(flat).row(0).transpose();
    }
};

using TaskModelF = TaskModel<float>;

// ── spec-facing operations ───────────────────────────────────────────────────

template <class T>
double task_metric(const TaskModel<T>& model, const std::vector<Image>& images, const std::vector<int>& labels) {
    if (images.size() != labels.size()) throw DimensionError("task_metric: images/labels length mismatch");
    if (images.empty()) throw DimensionError("task_metric: empty evaluation set");
    int correct = 0;
    for (std::size_t i = 0; i < images.size(); ++i) correct += (model.predict(images[i]) == labels[i]) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(images.size());
}

// Importance per patch: the last conv activation magnitude map, area-pooled
// onto the patch grid, min-max normalized to [0,1].
template <class T>
WeightVector task_weights(const TaskModel<T>& model, const Image& img, int grid_h, int grid_w) {
    return weights_from_activation_map(model.activation_map(img), grid_h, grid_w);
}

// ── training ─────────────────────────────────────────────────────────────────

struct TaskTrainConfig {
    int epochs = 12;
    int batch_size = 16;
    double lr = 5e-3;
    double min_val_accuracy = 0.95;  // build gate
    double val_fraction = 0.15;
    bool augment = true;
};

namespace detail {

// light augmentation so the frozen classifier tolerates mild reconstruction
// blur/noise without ever seeing codec output
template <class T>
Mat<T> augment_input(const Image& img, Rng& rng) {
    Image aug = img;
    if (rng.uniform() < 0.5) {  // horizontal flip, label-invariant for all shapes
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width / 2; ++x)
                for (int c = 0; c < 3; ++c) std::swap(aug.at(y, x, c), aug.at(y, img.width - 1 - x, c));
    }
    if (rng.uniform() < 0.3) {  // 3×3 box blur
        Image blurred = aug;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    double acc = 0;
                    int cnt = 0;
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int sy = y + dy, sx = x + dx;
                            if (sy < 0 || sy >= img.height || sx < 0 || sx >= img.width) continue;
                            acc += aug.at(sy, sx, c);
                            ++cnt;
                        }
                    }
                    blurred.at(y, x, c) = static_cast<float>(acc / cnt);
                }
            }
        }
        aug = blurred;
    }
    const double noise_std = rng.uniform(0.0, 0.05);
    for (auto& p : aug.pixels)
        p = static_cast<float>(std::clamp(static_cast<double>(p) + noise_std * rng.normal(), 0.0, 1.0));
    return TaskModel<T>::to_input(aug);
}

template <class T>
std::pair<double, Vec<T>> softmax_cross_entropy(const Vec<T>& logits, int label) {
    const T mx = logits.maxCoeff();
    Vec<T> p = (logits.array() - mx).exp();
    p /= p.sum();
    const double loss = -std::log(std::max(static_cast<double>(p(label)), 1e-12));
    Vec<T> g = p;
    g(label) -= T(1);
    return {loss, g};
}

}  // namespace detail

// Trains the classifier and freezes it; throws TrainingFailure if the clean
// held-out accuracy gate is missed.
template <class T = float>
TaskModel<T> train_task_model(const std::vector<LabeledImage>& train_set, const TaskModelConfig& cfg,
                              std::uint64_t seed, const TaskTrainConfig& train_cfg = {},
                              double* val_accuracy_out = nullptr) {
    if (train_set.size() < 20) throw DimensionError("train_task_model: training set too small");
    const auto val_count = std::max<std::size_t>(10, static_cast<std::size_t>(train_cfg.val_fraction * train_set.size()));
    const std::size_t fit_count = train_set.size() - val_count;

    TaskModel<T> model(cfg, derive_seed(seed, "task.init"));
    auto params = model.params();
    nn::Adam<T> opt(params, train_cfg.lr);
    Rng rng(derive_seed(seed, "task.train"));

    std::vector<std::size_t> order(fit_count);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(train_cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
            nn::zero_grads(params);
            for (std::size_t k = start; k < end; ++k) {
                const LabeledImage& sample = train_set[order[k]];
                Mat<T> input = train_cfg.augment ? detail::augment_input<T>(sample.image, rng)
                                                 : TaskModel<T>::to_input(sample.image);
                Vec<T> z = model.forward_train(input);
                auto [loss, glogits] = detail::softmax_cross_entropy(z, sample.label);
                glogits /= static_cast<T>(end - start);
                model.backward_train(glogits);
            }
            opt.step(params);
        }
    }

    int correct = 0;
    for (std::size_t i = fit_count; i < train_set.size(); ++i)
        correct += (model.predict(train_set[i].image) == train_set[i].label) ? 1 : 0;
    const double val_acc = static_cast<double>(correct) / static_cast<double>(val_count);
    if (val_accuracy_out) *val_accuracy_out = val_acc;
    if (val_acc < train_cfg.min_val_accuracy)
        throw TrainingFailure("train_task_model: held-out accuracy " + std::to_string(val_acc) + " below gate " +
                              std::to_string(train_cfg.min_val_accuracy));
    return model;
}

// ── checkpoints ──────────────────────────────────────────────────────────────

inline constexpr int kTaskCheckpointVersion = 1;

template <class T>
void save_task_checkpoint(TaskModel<T>& model, const std::string& path, const nlohmann::json& extra) {
    Archive a;
    a.manifest["kind"] = "task_checkpoint";
    a.manifest["format_version"] = kTaskCheckpointVersion;
    a.manifest["config"] = model.cfg.to_json();
    for (auto& [key, value] : extra.items()) a.manifest[key] = value;
    for (auto& [name, p] : model.params()) {
        Mat<float> w = p->w.template cast<float>();
        a.add(name, w);
    }
    a.save(path);
}

template <class T = float>
std::pair<TaskModel<T>, nlohmann::json> load_task_checkpoint(const std::string& path) {
    Archive a = Archive::load(path);
    if (a.manifest.value("kind", "") != "task_checkpoint") throw IoError("task checkpoint: wrong archive kind");
    if (a.manifest.value("format_version", 0) != kTaskCheckpointVersion)
        throw IoError("task checkpoint: unsupported format version");
    TaskModel<T> model(TaskModelConfig::from_json(a.manifest.at("config")), 0);
    for (auto& [name, p] : model.params()) {
        Mat<float> w = a.get_mat<float>(name);
        if (w.rows() != p->w.rows() || w.cols() != p->w.cols())
            throw IoError("task checkpoint: shape mismatch for '" + name + "'");
        p->w = w.template cast<T>();
    }
    return {std::move(model), a.manifest};
}

}  // namespace semcom

#endif
