#pragma once

#include "meshforge/nn/graph.hpp"
#include "meshforge/nn/layers.hpp"

#include <cmath>

namespace meshforge::nn {

/// Graph conv with dot-product neighbor attention plus single-head global
/// attention, each batch-normalized, summed and passed through an MLP:
///   x^_k = W1 x_k + sum_j a_kj W2 x_j,  a_k = softmax_j(q_k . k_j / sqrt(d))
///   S~   = MLP(BN(X^) + BN(X~))
template <typename S>
class GTBlock : public Module<S> {
public:
    GTBlock() = default;
    GTBlock(int d, Rng& rng)
        : d_(d),
          w1_(d, d, rng),
          w2_(d, d, rng, false),
          wq_(d, d, rng, false),
          wk_(d, d, rng, false),
          gq_(d, d, rng, false),
          gk_(d, d, rng, false),
          gv_(d, d, rng, false),
          bn1_(d),
          bn2_(d),
          mlp_({d, d, d}, rng) {}

    Tensor<S> graph_conv(const Tensor<S>& x, const GraphBatch& g) const {
        const S s = S(1) / std::sqrt(S(d_));
        auto msg = sparse_attention(wq_.forward(x), wk_.forward(x), w2_.forward(x), g.nbr_offsets, g.nbr_index, s);
        return add(w1_.forward(x), msg);
    }

    Tensor<S> global_attention(const Tensor<S>& x, const GraphBatch& g) const {
        const S s = S(1) / std::sqrt(S(d_));
        return sparse_attention(gq_.forward(x), gk_.forward(x), gv_.forward(x), g.glob_offsets, g.glob_index, s);
    }

    Tensor<S> forward(const Tensor<S>& x, const GraphBatch& g, BnMode mode) {
        auto a = bn1_.forward(graph_conv(x, g), mode);
        auto b = bn2_.forward(global_attention(x, g), mode);
        return mlp_.forward(add(a, b));
    }

    void visit(const std::string& prefix, const TensorVisitor<S>& f) override {
        w1_.visit(prefix + "w1.", f);
        w2_.visit(prefix + "w2.", f);
        wq_.visit(prefix + "wq.", f);
        wk_.visit(prefix + "wk.", f);
        gq_.visit(prefix + "gq.", f);
        gk_.visit(prefix + "gk.", f);
        gv_.visit(prefix + "gv.", f);
        bn1_.visit(prefix + "bn1.", f);
        bn2_.visit(prefix + "bn2.", f);
        mlp_.visit(prefix + "mlp.", f);
    }

private:
    int d_ = 64;
    Linear<S> w1_, w2_, wq_, wk_, gq_, gk_, gv_;
    BatchNorm<S> bn1_, bn2_;
    Mlp<S> mlp_;
};

/// MLP_e [dim, 32, 64] -> GT -> GT -> MLP_d [64, 64, 64]. One output row per
/// input row.
template <typename S>
class StateEncoder : public Module<S> {
public:
    static constexpr int width = 64;

    StateEncoder() = default;
    StateEncoder(int dim, Rng& rng)
        : dim_(dim), mlp_e_({dim, 32, width}, rng), gt1_(width, rng), gt2_(width, rng), mlp_d_({width, width, width}, rng) {}

    Tensor<S> forward(const GraphBatch& g, BnMode mode) {
        if (g.dim != dim_) throw ShapeError("encoder expects dimension " + std::to_string(dim_));
        Tensor<S> x(g.features.cast<S>());
        x = mlp_e_.forward(x);
        x = gt1_.forward(x, g, mode);
        x = gt2_.forward(x, g, mode);
        return mlp_d_.forward(x);
    }

    void visit(const std::string& prefix, const TensorVisitor<S>& f) override {
        mlp_e_.visit(prefix + "mlp_e.", f);
        gt1_.visit(prefix + "gt1.", f);
        gt2_.visit(prefix + "gt2.", f);
        mlp_d_.visit(prefix + "mlp_d.", f);
    }

    int dim() const { return dim_; }

private:
    int dim_ = 2;
    Mlp<S> mlp_e_;
    GTBlock<S> gt1_, gt2_;
    Mlp<S> mlp_d_;
};

}  // namespace meshforge::nn
