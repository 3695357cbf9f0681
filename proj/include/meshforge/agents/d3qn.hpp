#pragma once

#include "meshforge/agents/replay.hpp"
#include "meshforge/nn/adam.hpp"
#include "meshforge/nn/checkpoint.hpp"
#include "meshforge/nn/encoder.hpp"
#include "meshforge/rl/reward.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshforge::agents {

struct D3qnConfig {
    double lr = 3e-4;
    int batch = 64;
    double discount = 0.995;
    double epsilon_start = 0.3;
    double epsilon_final = 0.05;
    int target_sync = 500;  // updates between hard target copies
    int start_steps = 500;
    std::size_t buffer = 100000;

    void validate() const {
        if (!(lr > 0 && batch > 0 && discount > 0 && target_sync > 0 && buffer > 0)) {
            throw std::invalid_argument("D3QN settings must be positive");
        }
        if (!(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_final >= 0 && epsilon_final <= 1)) {
            throw std::invalid_argument("epsilon must lie in [0, 1]");
        }
    }
};

/// Value head on the mean ring encoding, advantage head on every row. Row 0
/// (the center) is the no-op slot, row i the edge to ring node i.
template <typename S>
struct FlipperNets : nn::Module<S> {
    nn::StateEncoder<S> encoder;
    nn::Mlp<S> value, advantage;

    FlipperNets(int dim, Rng& rng) : encoder(dim, rng), value({64, 32, 1}, rng), advantage({64, 32, 1}, rng) {}

    /// One Q-value per batch row.
    nn::Tensor<S> q(const nn::GraphBatch& g, nn::BnMode mode) {
        const auto s = encoder.forward(g, mode);
        const auto v = value.forward(group_mean(s, g.ring_offsets, g.ring_rows));
        const auto a = advantage.forward(s);
        return dueling_combine(v, a, g.offsets);
    }

    void visit(const std::string& prefix, const nn::TensorVisitor<S>& f) override {
        encoder.visit(prefix + "encoder.", f);
        value.visit(prefix + "value.", f);
        advantage.visit(prefix + "advantage.", f);
    }
};

/// Greedy choice through the masked softmax: probabilities of slots beyond
/// the ring are zeroed before the argmax.
inline int masked_softmax_argmax(const std::vector<double>& q, int ring_size) {
    const auto mask = rl::build_action_mask(ring_size);
    const int n = static_cast<int>(std::min<std::size_t>(q.size(), rl::action_slots));
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) mx = std::max(mx, q[static_cast<std::size_t>(i)]);
    double z = 0.0;
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z += p[static_cast<std::size_t>(i)] = std::exp(q[static_cast<std::size_t>(i)] - mx);
    int best = 0;
    double best_p = -1.0;
    for (int i = 0; i < n; ++i) {
        const double pi = p[static_cast<std::size_t>(i)] / z * mask[static_cast<std::size_t>(i)];
        if (pi > best_p) {
            best_p = pi;
            best = i;
        }
    }
    return best;
}

template <typename S = float>
class D3qnAgent {
public:
    using Mat = nn::Matrix<S>;
    using T = nn::Tensor<S>;

    D3qnAgent(int dim, D3qnConfig cfg, std::uint64_t seed)
        : dim_(dim), cfg_(cfg), init_rng_(seed), online_(dim, init_rng_), target_(dim, init_rng_) {
        cfg_.validate();
        nn::hard_update(target_, online_);
        opt_ = nn::Adam<S>(online_.parameters(), cfg_.lr);
    }

    FlipperNets<S>& online() { return online_; }
    FlipperNets<S>& target() { return target_; }
    const D3qnConfig& config() const { return cfg_; }

    std::vector<double> q_values(const nn::Observation& o) {
        nn::NoGrad ng;
        const Mat q = online_.q(nn::make_batch(o), nn::BnMode::Eval).value();
        std::vector<double> out(static_cast<std::size_t>(q.rows()));
        for (Eigen::Index i = 0; i < q.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(q(i, 0));
        return out;
    }

    /// Epsilon-greedy over the N+1 valid slots.
    int act(const nn::Observation& o, double epsilon, Rng& rng) {
        const int ring = o.rows() - 1;
        if (epsilon > 0.0 && uniform01(rng) < epsilon) {
            return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(ring + 1)));
        }
        return masked_softmax_argmax(q_values(o), ring);
    }

    /// Double-DQN targets: the online net picks the next action among the
    /// patch's valid slots, the target net scores it.
    Mat targets(const std::vector<const FlipTransition*>& batch) {
        std::vector<const nn::Observation*> s2;
        for (const auto* t : batch) s2.push_back(&t->next_state);
        return targets(batch, nn::make_batch(s2));
    }

    double update(const std::vector<const FlipTransition*>& batch) {
        const auto n = static_cast<Eigen::Index>(batch.size());
        std::vector<const nn::Observation*> s, s2;
        for (const auto* t : batch) {
            s.push_back(&t->state);
            s2.push_back(&t->next_state);
        }
        const auto g = nn::make_batch(s);
        const Mat y = targets(batch, nn::make_batch(s2));
        std::vector<int> rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = batch[static_cast<std::size_t>(i)]->action;
            if (a < 0 || a >= g.offsets[static_cast<std::size_t>(i) + 1] - g.offsets[static_cast<std::size_t>(i)]) {
                throw std::out_of_range("stored flip action outside the patch");
            }
            rows.push_back(g.offsets[static_cast<std::size_t>(i)] + a);
        }
        online_.zero_grad();
        const auto loss = mse(gather_rows(online_.q(g, nn::BnMode::Train), rows), y);
        loss.backward();
        opt_.step();
        if (++updates_ % cfg_.target_sync == 0) nn::hard_update(target_, online_);
        return static_cast<double>(loss.item());
    }

    long updates() const { return updates_; }

    nn::PolicyBundle bundle() {
        nn::PolicyBundle b;
        b.store(online_, "");
        b.meta["agent"] = "d3qn";
        b.meta["dim"] = dim_;
        return b;
    }

    void load(const nn::PolicyBundle& b) {
        b.restore(online_, "");
        nn::hard_update(target_, online_);
    }

private:
    Mat targets(const std::vector<const FlipTransition*>& batch, const nn::GraphBatch& g2) {
        const auto n = static_cast<Eigen::Index>(batch.size());
        Mat y(n, 1);
        nn::NoGrad ng;
        const Mat qo = online_.q(g2, nn::BnMode::BatchStats).value();
        const Mat qt = target_.q(g2, nn::BnMode::BatchStats).value();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto* tr = batch[static_cast<std::size_t>(i)];
            int best = g2.offsets[static_cast<std::size_t>(i)];
            for (int r = best; r < g2.offsets[static_cast<std::size_t>(i) + 1]; ++r) {
                if (qo(r, 0) > qo(best, 0)) best = r;
            }
            const double boot = tr->done ? 0.0 : cfg_.discount * static_cast<double>(qt(best, 0));
            y(i, 0) = static_cast<S>(tr->reward + boot);
        }
        return y;
    }

    int dim_;
    D3qnConfig cfg_;
    Rng init_rng_;
    FlipperNets<S> online_, target_;
    nn::Adam<S> opt_;
    long updates_ = 0;
};

}  // namespace meshforge::agents
