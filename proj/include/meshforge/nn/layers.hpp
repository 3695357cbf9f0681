#pragma once

#include "meshforge/nn/tensor.hpp"
#include "meshforge/util/random.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace meshforge::nn {

enum class Slot { Parameter, Buffer };

template <typename S>
using TensorVisitor = std::function<void(const std::string& name, Tensor<S>& t, Slot slot)>;

/// Anything holding named tensors. Traversal order is fixed, which is what
/// target copies, soft updates and checkpoints rely on.
template <typename S>
class Module {
public:
    virtual ~Module() = default;
    virtual void visit(const std::string& prefix, const TensorVisitor<S>& f) = 0;

    std::vector<Tensor<S>> parameters() {
        std::vector<Tensor<S>> out;
        visit("", [&](const std::string&, Tensor<S>& t, Slot s) {
            if (s == Slot::Parameter) out.push_back(t);
        });
        return out;
    }

    std::vector<std::pair<std::string, Tensor<S>>> named_tensors(const std::string& prefix = "") {
        std::vector<std::pair<std::string, Tensor<S>>> out;
        visit(prefix, [&](const std::string& n, Tensor<S>& t, Slot) { out.emplace_back(n, t); });
        return out;
    }

    void zero_grad() {
        visit("", [](const std::string&, Tensor<S>& t, Slot) { t.zero_grad(); });
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto& p : parameters()) n += static_cast<std::size_t>(p.value().size());
        return n;
    }
};

/// dst <- tau * src + (1 - tau) * dst over all tensors, buffers included.
/// tau = 1 is a hard copy.
template <typename S>
void soft_update(Module<S>& dst, Module<S>& src, S tau) {
    auto d = dst.named_tensors();
    auto s = src.named_tensors();
    if (d.size() != s.size()) throw ShapeError("soft_update: modules differ");
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto& dv = d[i].second.mutable_value();
        const auto& sv = s[i].second.value();
        if (dv.rows() != sv.rows() || dv.cols() != sv.cols()) throw ShapeError("soft_update: shape mismatch at " + d[i].first);
        if (tau == S(1)) {
            dv = sv;
        } else {
            dv = tau * sv + (S(1) - tau) * dv;
        }
    }
}

template <typename S>
void hard_update(Module<S>& dst, Module<S>& src) {
    soft_update(dst, src, S(1));
}

template <typename S>
class Linear : public Module<S> {
public:
    Linear() = default;
    Linear(int in, int out, Rng& rng, bool bias = true) : in_(in), out_(out) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Matrix<S> w(in, out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<S>(uniform(rng, -bound, bound));
        w_ = Tensor<S>(std::move(w), true);
        if (bias) {
            Matrix<S> b(1, out);
            for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = static_cast<S>(uniform(rng, -bound, bound));
            b_ = Tensor<S>(std::move(b), true);
        }
    }

    Tensor<S> forward(const Tensor<S>& x) const { return linear(x, w_, b_); }

    void visit(const std::string& prefix, const TensorVisitor<S>& f) override {
        f(prefix + "weight", w_, Slot::Parameter);
        if (b_.defined()) f(prefix + "bias", b_, Slot::Parameter);
    }

    int in_features() const { return in_; }
    int out_features() const { return out_; }
    Tensor<S>& weight() { return w_; }
    Tensor<S>& bias() { return b_; }

private:
    int in_ = 0, out_ = 0;
    Tensor<S> w_, b_;
};

/// Fully connected stack with ReLU between layers and a linear output.
template <typename S>
class Mlp : public Module<S> {
public:
    Mlp() = default;
    Mlp(const std::vector<int>& widths, Rng& rng) : widths_(widths) {
        if (widths.size() < 2) throw ShapeError("Mlp needs at least two widths");
        for (std::size_t i = 0; i + 1 < widths.size(); ++i) layers_.emplace_back(widths[i], widths[i + 1], rng);
    }

    Tensor<S> forward(Tensor<S> x) const {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            x = layers_[i].forward(x);
            if (i + 1 < layers_.size()) x = relu(x);
        }
        return x;
    }

    void visit(const std::string& prefix, const TensorVisitor<S>& f) override {
        for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].visit(prefix + std::to_string(i) + ".", f);
    }

    const std::vector<int>& widths() const { return widths_; }
    std::size_t depth() const { return layers_.size(); }
    Linear<S>& layer(std::size_t i) { return layers_.at(i); }

private:
    std::vector<int> widths_;
    std::vector<Linear<S>> layers_;
};

/// How batch normalization picks its statistics.
enum class BnMode {
    Train,       // batch statistics, running averages updated
    BatchStats,  // batch statistics, running averages untouched
    Eval,        // running averages
};

template <typename S>
class BatchNorm : public Module<S> {
public:
    static constexpr double momentum = 0.1;
    static constexpr double eps = 1e-5;

    BatchNorm() = default;
    explicit BatchNorm(int width)
        : gamma_(Matrix<S>::Ones(1, width), true),
          beta_(Matrix<S>::Zero(1, width), true),
          running_mean_(Matrix<S>::Zero(1, width)),
          running_var_(Matrix<S>::Ones(1, width)) {}

    Tensor<S> forward(const Tensor<S>& x, BnMode mode) {
        if (mode == BnMode::Eval) {
            return batch_norm_fixed(x, gamma_, beta_, running_mean_.value(), running_var_.value(), S(eps));
        }
        Matrix<S> m, v;
        auto y = batch_norm_train(x, gamma_, beta_, S(eps), &m, &v);
        if (mode == BnMode::Train) {
            const S mom = S(momentum);
            // running variance uses the unbiased estimate
            const S n = S(x.rows());
            const Matrix<S> unbiased = x.rows() > 1 ? Matrix<S>(v * (n / (n - S(1)))) : v;
            running_mean_.mutable_value() = (S(1) - mom) * running_mean_.value() + mom * m;
            running_var_.mutable_value() = (S(1) - mom) * running_var_.value() + mom * unbiased;
        }
        return y;
    }

    void visit(const std::string& prefix, const TensorVisitor<S>& f) override {
        f(prefix + "gamma", gamma_, Slot::Parameter);
        f(prefix + "beta", beta_, Slot::Parameter);
        f(prefix + "running_mean", running_mean_, Slot::Buffer);
        f(prefix + "running_var", running_var_, Slot::Buffer);
    }

private:
    Tensor<S> gamma_, beta_, running_mean_, running_var_;
};

}  // namespace meshforge::nn
