#pragma once

#include "meshforge/nn/tensor.hpp"

#include <cmath>
#include <vector>

namespace meshforge::nn {

template <typename S>
class Adam {
public:
    Adam() = default;
    Adam(std::vector<Tensor<S>> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        for (auto& p : params_) {
            m_.push_back(Matrix<S>::Zero(p.rows(), p.cols()));
            v_.push_back(Matrix<S>::Zero(p.rows(), p.cols()));
        }
    }

    /// Applies one update from the accumulated gradients. Parameters without
    /// a gradient are treated as having a zero gradient.
    void step() {
        ++t_;
        const S c1 = S(1) - static_cast<S>(std::pow(b1_, t_));
        const S c2 = S(1) - static_cast<S>(std::pow(b2_, t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (p.grad().size() != 0) {
                m_[i] = S(b1_) * m_[i] + S(1 - b1_) * p.grad();
                v_[i] = S(b2_) * v_[i] + S(1 - b2_) * p.grad().cwiseAbs2();
            } else {
                m_[i] *= S(b1_);
                v_[i] *= S(b2_);
            }
            p.mutable_value().array() -=
                S(lr_) * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + S(eps_));
            detail::check_finite(p.value(), "adam");
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    long steps() const { return t_; }

private:
    std::vector<Tensor<S>> params_;
    std::vector<Matrix<S>> m_, v_;
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
};

}  // namespace meshforge::nn
