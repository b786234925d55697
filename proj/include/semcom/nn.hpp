#ifndef SEMCOM_NN_HPP
#define SEMCOM_NN_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "semcom/common.hpp"
#include "semcom/rng.hpp"

// Minimal reverse-mode layer library: each layer owns its parameters, caches
// what forward() needs for backward(), and exposes a cache-free apply() for
// const inference. Gradients accumulate until zero_grad().
namespace semcom::nn {

template <class T>
struct Param {
    Mat<T> w, g;

    void setup(Eigen::Index rows, Eigen::Index cols) {
        w = Mat<T>::Zero(rows, cols);
        g = Mat<T>::Zero(rows, cols);
    }
    void zero_grad() { g.setZero(); }
    Eigen::Index size() const { return w.size(); }
};

template <class T>
using NamedParams = std::vector<std::pair<std::string, Param<T>*>>;

template <class T>
void zero_grads(const NamedParams<T>& params) {
    for (auto& [name, p] : params) p->zero_grad();
}

template <class T>
double grad_norm(const NamedParams<T>& params) {
    double sq = 0.0;
    for (auto& [name, p] : params) sq += static_cast<double>(p->g.template cast<double>().squaredNorm());
    return std::sqrt(sq);
}

template <class T>
double clip_grad_norm(const NamedParams<T>& params, double max_norm) {
    const double norm = grad_norm(params);
    if (norm > max_norm && norm > 0.0) {
        const T s = static_cast<T>(max_norm / norm);
        for (auto& [name, p] : params) p->g *= s;
    }
    return norm;
}

template <class T>
class Adam {
   public:
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit Adam(const NamedParams<T>& params, double lr_ = 1e-3) : lr(lr_) {
        for (auto& [name, p] : params) {
            m_.push_back(Mat<T>::Zero(p->w.rows(), p->w.cols()));
            v_.push_back(Mat<T>::Zero(p->w.rows(), p->w.cols()));
        }
    }

    void step(const NamedParams<T>& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, t_);
        const double bc2 = 1.0 - std::pow(beta2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i].second;
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * p.g;
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * p.g.cwiseProduct(p.g);
            const Mat<T> mhat = m_[i] / static_cast<T>(bc1);
            const Mat<T> vhat = v_[i] / static_cast<T>(bc2);
            p.w -= (static_cast<T>(lr) * mhat.array() / (vhat.array().sqrt() + static_cast<T>(eps))).matrix();
        }
    }

   private:
    std::vector<Mat<T>> m_, v_;
    long long t_ = 0;
};

// ── layers ──────────────────────────────────────────────────────────────────

template <class T>
struct Linear {
    Param<T> W;  // in × out
    Param<T> b;  // 1 × out

    void init(int in, int out, Rng& rng) {
        W.setup(in, out);
        b.setup(1, out);
        const double std = std::sqrt(2.0 / (in + out));
        rng.fill_normal(W.w, std);
    }

    Mat<T> apply(const Mat<T>& x) const { return (x * W.w).rowwise() + b.w.row(0); }

    Mat<T> forward(const Mat<T>& x) {
        x_ = x;
        return apply(x);
    }

    Mat<T> backward(const Mat<T>& gy) {
        W.g.noalias() += x_.transpose() * gy;
        b.g.row(0) += gy.colwise().sum();
        return gy * W.w.transpose();
    }

    void collect(const std::string& prefix, NamedParams<T>& out) {
        out.emplace_back(prefix + ".W", &W);
        out.emplace_back(prefix + ".b", &b);
    }

   private:
    Mat<T> x_;
};

template <class T>
struct LayerNorm {
    static constexpr double kEps = 1e-5;
    Param<T> gamma, beta;  // 1 × d

    void init(int d) {
        gamma.setup(1, d);
        beta.setup(1, d);
        gamma.w.setOnes();
    }

    Mat<T> apply(const Mat<T>& x) const {
        Mat<T> y(x.rows(), x.cols());
        const auto d = static_cast<T>(x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const T mu = x.row(i).mean();
            const T var = (x.row(i).array() - mu).square().sum() / d;
            const T inv = T(1) / std::sqrt(var + static_cast<T>(kEps));
            y.row(i) = (((x.row(i).array() - mu) * inv) * gamma.w.row(0).array() + beta.w.row(0).array()).matrix();
        }
        return y;
    }

    Mat<T> forward(const Mat<T>& x) {
        xhat_.resize(x.rows(), x.cols());
        inv_std_.resize(x.rows());
        const auto d = static_cast<T>(x.cols());
        Mat<T> y(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const T mu = x.row(i).mean();
            const T var = (x.row(i).array() - mu).square().sum() / d;
            const T inv = T(1) / std::sqrt(var + static_cast<T>(kEps));
            inv_std_(i) = inv;
            xhat_.row(i) = ((x.row(i).array() - mu) * inv).matrix();
            y.row(i) = (xhat_.row(i).array() * gamma.w.row(0).array() + beta.w.row(0).array()).matrix();
        }
        return y;
    }

    Mat<T> backward(const Mat<T>& gy) {
        const auto d = static_cast<T>(gy.cols());
        Mat<T> gx(gy.rows(), gy.cols());
        for (Eigen::Index i = 0; i < gy.rows(); ++i) {
            const auto ghat = (gy.row(i).array() * gamma.w.row(0).array()).matrix().eval();
            const T sum_g = ghat.sum();
            const T sum_gx = ghat.cwiseProduct(xhat_.row(i)).sum();
            gx.row(i) =
                ((ghat.array() * d - sum_g - xhat_.row(i).array() * sum_gx) * (inv_std_(i) / d)).matrix();
            gamma.g.row(0) += gy.row(i).cwiseProduct(xhat_.row(i));
            beta.g.row(0) += gy.row(i);
        }
        return gx;
    }

    void collect(const std::string& prefix, NamedParams<T>& out) {
        out.emplace_back(prefix + ".gamma", &gamma);
        out.emplace_back(prefix + ".beta", &beta);
    }

   private:
    Mat<T> xhat_;
    Vec<T> inv_std_;
};

template <class T>
struct Gelu {
    static Mat<T> value(const Mat<T>& x) {
        return x.unaryExpr([](T v) { return static_cast<T>(0.5 * v * (1.0 + std::erf(v * M_SQRT1_2))); });
    }

    Mat<T> apply(const Mat<T>& x) const { return value(x); }

    Mat<T> forward(const Mat<T>& x) {
        x_ = x;
        return value(x);
    }

    Mat<T> backward(const Mat<T>& gy) {
        constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599344;
        Mat<T> d = x_.unaryExpr([](T v) {
            const double phi = inv_sqrt_2pi * std::exp(-0.5 * static_cast<double>(v) * v);
            return static_cast<T>(0.5 * (1.0 + std::erf(v * M_SQRT1_2)) + static_cast<double>(v) * phi);
        });
        return gy.cwiseProduct(d);
    }

   private:
    Mat<T> x_;
};

// Multi-head self-attention over a batch of fixed-length sequences stacked
// row-wise: x is (batch*seq_len) × dim.
template <class T>
struct MultiHeadAttention {
    int dim = 0, heads = 1, head_dim = 0;
    Linear<T> wq, wk, wv, wo;

    void init(int dim_, int heads_, Rng& rng) {
        if (dim_ % heads_ != 0) throw DimensionError("attention: dim must divide evenly into heads");
        dim = dim_;
        heads = heads_;
        head_dim = dim_ / heads_;
        wq.init(dim, dim, rng);
        wk.init(dim, dim, rng);
        wv.init(dim, dim, rng);
        wo.init(dim, dim, rng);
    }

    Mat<T> apply(const Mat<T>& x, int seq_len) const {
        const Eigen::Index batch = check_batch(x, seq_len);
        const Mat<T> q = wq.apply(x), k = wk.apply(x), v = wv.apply(x);
        Mat<T> ctx(x.rows(), dim);
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));
        for (Eigen::Index bi = 0; bi < batch; ++bi) {
            for (int h = 0; h < heads; ++h) {
                const auto qh = q.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                const auto kh = k.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                const auto vh = v.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                Mat<T> s = qh * kh.transpose() * inv_sqrt;
                softmax_rows(s);
                ctx.block(bi * seq_len, h * head_dim, seq_len, head_dim).noalias() = s * vh;
            }
        }
        return wo.apply(ctx);
    }

    Mat<T> forward(const Mat<T>& x, int seq_len) {
        seq_ = seq_len;
        const Eigen::Index batch = check_batch(x, seq_len);
        q_ = wq.forward(x);
        k_ = wk.forward(x);
        v_ = wv.forward(x);
        probs_.assign(static_cast<std::size_t>(batch) * heads, Mat<T>());
        Mat<T> ctx(x.rows(), dim);
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));
        for (Eigen::Index bi = 0; bi < batch; ++bi) {
            for (int h = 0; h < heads; ++h) {
                const auto qh = q_.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                const auto kh = k_.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                const auto vh = v_.block(bi * seq_len, h * head_dim, seq_len, head_dim);
                Mat<T> s = qh * kh.transpose() * inv_sqrt;
                softmax_rows(s);
                ctx.block(bi * seq_len, h * head_dim, seq_len, head_dim).noalias() = s * vh;
                probs_[static_cast<std::size_t>(bi) * heads + h] = std::move(s);
            }
        }
        return wo.forward(ctx);
    }

    Mat<T> backward(const Mat<T>& gy) {
        const Mat<T> gctx = wo.backward(gy);
        const Eigen::Index batch = gy.rows() / seq_;
        Mat<T> gq = Mat<T>::Zero(gy.rows(), dim), gk = Mat<T>::Zero(gy.rows(), dim), gv = Mat<T>::Zero(gy.rows(), dim);
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));
        for (Eigen::Index bi = 0; bi < batch; ++bi) {
            for (int h = 0; h < heads; ++h) {
                const Mat<T>& p = probs_[static_cast<std::size_t>(bi) * heads + h];
                const auto qh = q_.block(bi * seq_, h * head_dim, seq_, head_dim);
                const auto kh = k_.block(bi * seq_, h * head_dim, seq_, head_dim);
                const auto vh = v_.block(bi * seq_, h * head_dim, seq_, head_dim);
                const auto gctx_h = gctx.block(bi * seq_, h * head_dim, seq_, head_dim);
                Mat<T> gp = gctx_h * vh.transpose();
                gv.block(bi * seq_, h * head_dim, seq_, head_dim).noalias() = p.transpose() * gctx_h;
                // softmax jacobian: gs = p .* (gp - rowsum(gp .* p))
                Mat<T> gs(p.rows(), p.cols());
                for (Eigen::Index r = 0; r < p.rows(); ++r) {
                    const T dot = gp.row(r).cwiseProduct(p.row(r)).sum();
                    gs.row(r) = (p.row(r).array() * (gp.row(r).array() - dot)).matrix();
                }
                gs *= inv_sqrt;
                gq.block(bi * seq_, h * head_dim, seq_, head_dim).noalias() = gs * kh;
                gk.block(bi * seq_, h * head_dim, seq_, head_dim).noalias() = gs.transpose() * qh;
            }
        }
        return wq.backward(gq) + wk.backward(gk) + wv.backward(gv);
    }

    void collect(const std::string& prefix, NamedParams<T>& out) {
        wq.collect(prefix + ".wq", out);
        wk.collect(prefix + ".wk", out);
        wv.collect(prefix + ".wv", out);
        wo.collect(prefix + ".wo", out);
    }

   private:
    Mat<T> q_, k_, v_;
    std::vector<Mat<T>> probs_;
    int seq_ = 0;

    Eigen::Index check_batch(const Mat<T>& x, int seq_len) const {
        if (seq_len <= 0 || x.rows() % seq_len != 0)
            throw DimensionError("attention: rows not a multiple of seq_len");
        if (x.cols() != dim) throw DimensionError("attention: input width != dim");
        return x.rows() / seq_len;
    }

    static void softmax_rows(Mat<T>& s) {
        for (Eigen::Index r = 0; r < s.rows(); ++r) {
            const T mx = s.row(r).maxCoeff();
            s.row(r) = (s.row(r).array() - mx).exp();
            s.row(r) /= s.row(r).sum();
        }
    }
};

// Pre-norm transformer block: x + attn(ln1(x)), then x + mlp(ln2(x)).
template <class T>
struct TransformerBlock {
    LayerNorm<T> ln1, ln2;
    MultiHeadAttention<T> attn;
    Linear<T> fc1, fc2;
    Gelu<T> act;

    void init(int dim, int heads, int mlp_hidden, Rng& rng) {
        ln1.init(dim);
        ln2.init(dim);
        attn.init(dim, heads, rng);
        fc1.init(dim, mlp_hidden, rng);
        fc2.init(mlp_hidden, dim, rng);
    }

    Mat<T> apply(const Mat<T>& x, int seq_len) const {
        Mat<T> a = x + attn.apply(ln1.apply(x), seq_len);
        return a + fc2.apply(act.apply(fc1.apply(ln2.apply(a))));
    }

    Mat<T> forward(const Mat<T>& x, int seq_len) {
        Mat<T> a = x + attn.forward(ln1.forward(x), seq_len);
        return a + fc2.forward(act.forward(fc1.forward(ln2.forward(a))));
    }

    Mat<T> backward(const Mat<T>& gy) {
        Mat<T> ga = gy + ln2.backward(fc1.backward(act.backward(fc2.backward(gy))));
        return ga + ln1.backward(attn.backward(ga));
    }

    void collect(const std::string& prefix, NamedParams<T>& out) {
        ln1.collect(prefix + ".ln1", out);
        attn.collect(prefix + ".attn", out);
        ln2.collect(prefix + ".ln2", out);
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
    }
};

// Fixed 2-D sin-cos positional table for a gh×gw token grid; dim must be a
// multiple of 4 (sin+cos per axis).
template <class T>
Mat<T> sincos_position_table(int grid_h, int grid_w, int dim) {
    if (dim % 4 != 0) throw DimensionError("position table: dim must be a multiple of 4");
    const int axis_dim = dim / 2;
    const int half = axis_dim / 2;
    Mat<T> table(static_cast<Eigen::Index>(grid_h) * grid_w, dim);
    for (int y = 0; y < grid_h; ++y) {
        for (int x = 0; x < grid_w; ++x) {
            T* row = table.row(static_cast<Eigen::Index>(y) * grid_w + x).data();
            for (int k = 0; k < half; ++k) {
                const double omega = 1.0 / std::pow(10000.0, static_cast<double>(k) / half);
                row[k] = static_cast<T>(std::sin(y * omega));
                row[half + k] = static_cast<T>(std::cos(y * omega));
                row[axis_dim + k] = static_cast<T>(std::sin(x * omega));
                row[axis_dim + half + k] = static_cast<T>(std::cos(x * omega));
            }
        }
    }
    return table;
}

}  // namespace semcom::nn

#endif
