#pragma once

#include "meshforge/agents/replay.hpp"
#include "meshforge/nn/adam.hpp"
#include "meshforge/nn/checkpoint.hpp"
#include "meshforge/nn/encoder.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace meshforge::agents {

struct Td3Config {
    double lr = 1e-3;
    int batch = 64;
    double discount = 0.99;
    double tau = 0.005;
    int policy_delay = 2;
    /// Exploration and target noise are fractions of the action range.
    double exploration_noise = 0.2;
    double exploration_noise_final = 0.02;
    double target_noise = 0.2;
    double target_noise_clip = 0.5;
    double action_range = 0.25;
    int start_steps = 1000;
    std::size_t buffer = 100000;
    /// Gradient updates per environment step.
    int updates_per_step = 1;

    void validate() const {
        if (!(lr > 0 && batch > 0 && discount > 0 && tau > 0 && policy_delay > 0 && exploration_noise >= 0 &&
              updates_per_step > 0 &&
              target_noise >= 0 && target_noise_clip >= 0 && buffer > 0)) {
            throw std::invalid_argument("TD3 settings must be positive");
        }
        if (!(action_range > 0.0 && action_range <= 1.0)) throw std::invalid_argument("action range must lie in (0, 1]");
    }
};

/// Encoder shared by the actor and both critics.
template <typename S>
struct SmootherNets : nn::Module<S> {
    nn::StateEncoder<S> encoder;
    nn::Mlp<S> actor, critic1, critic2;

    SmootherNets(int dim, Rng& rng)
        : encoder(dim, rng),
          actor({64, 32, dim}, rng),
          critic1({64 + dim, 32, 16, 1}, rng),
          critic2({64 + dim, 32, 16, 1}, rng) {}

    void visit(const std::string& prefix, const nn::TensorVisitor<S>& f) override {
        encoder.visit(prefix + "encoder.", f);
        actor.visit(prefix + "actor.", f);
        critic1.visit(prefix + "critic1.", f);
        critic2.visit(prefix + "critic2.", f);
    }
};

struct Td3Losses {
    double critic = 0.0;
    double actor = 0.0;
    bool actor_updated = false;
};

template <typename S = float>
class Td3Agent {
public:
    using Mat = nn::Matrix<S>;
    using T = nn::Tensor<S>;

    Td3Agent(int dim, Td3Config cfg, std::uint64_t seed)
        : dim_(dim), cfg_(cfg), init_rng_(seed), online_(dim, init_rng_), target_(dim, init_rng_) {
        cfg_.validate();
        nn::hard_update(target_, online_);
        std::vector<T> critic_params = online_.encoder.parameters();
        for (auto& p : online_.critic1.parameters()) critic_params.push_back(p);
        for (auto& p : online_.critic2.parameters()) critic_params.push_back(p);
        critic_opt_ = nn::Adam<S>(critic_params, cfg_.lr);
        actor_opt_ = nn::Adam<S>(online_.actor.parameters(), cfg_.lr);
    }

    int dim() const { return dim_; }
    const Td3Config& config() const { return cfg_; }
    SmootherNets<S>& online() { return online_; }
    SmootherNets<S>& target() { return target_; }

    /// Deterministic action for one patch (inference statistics).
    Vec3 act(const nn::Observation& o) {
        nn::NoGrad ng;
        const auto g = nn::make_batch(o);
        const auto s = online_.encoder.forward(g, nn::BnMode::Eval);
        const Mat a = policy(online_, gather_rows(s, g.centers)).value();
        Vec3 out = Vec3::Zero();
        for (int c = 0; c < dim_; ++c) out[c] = static_cast<double>(a(0, c));
        return out;
    }

    /// Clipped double-Q targets r + discount * min(Q1', Q2') at the smoothed
    /// target action; terminal transitions keep r alone.
    Mat critic_targets(const std::vector<const SmoothTransition*>& batch, Rng& rng) {
        std::vector<const nn::Observation*> s2;
        for (const auto* t : batch) s2.push_back(&t->next_state);
        return critic_targets(batch, nn::make_batch(s2), rng);
    }

    Td3Losses update(const std::vector<const SmoothTransition*>& batch, Rng& rng) {
        const auto n = static_cast<Eigen::Index>(batch.size());
        std::vector<const nn::Observation*> s, s2;
        Mat actions(n, dim_);
        for (Eigen::Index i = 0; i < n; ++i) {
            s.push_back(&batch[static_cast<std::size_t>(i)]->state);
            s2.push_back(&batch[static_cast<std::size_t>(i)]->next_state);
            for (int c = 0; c < dim_; ++c) actions(i, c) = static_cast<S>(batch[static_cast<std::size_t>(i)]->action[c]);
        }
        const auto g = nn::make_batch(s);
        const Mat y = critic_targets(batch, nn::make_batch(s2), rng);

        Td3Losses out;
        online_.zero_grad();
        const auto enc = online_.encoder.forward(g, nn::BnMode::Train);
        const auto h = gather_rows(enc, g.centers);
        const T sa = concat_cols(h, T(Mat(actions * inv_range())));
        const auto loss = add(mse(online_.critic1.forward(sa), y), mse(online_.critic2.forward(sa), y));
        out.critic = static_cast<double>(loss.item());
        loss.backward();
        critic_opt_.step();

        if (++updates_ % cfg_.policy_delay == 0) {
            // the actor sees detached encodings so only the critic loss shapes the encoder
            const T hd = detach(h);
            online_.actor.zero_grad();
            const auto q = online_.critic1.forward(concat_cols(hd, tanh(online_.actor.forward(hd))));
            const auto actor_loss = scale(mean(q), S(-1));
            out.actor = static_cast<double>(actor_loss.item());
            out.actor_updated = true;
            actor_loss.backward();
            actor_opt_.step();
            nn::soft_update(target_, online_, static_cast<S>(cfg_.tau));
        }
        return out;
    }

    long updates() const { return updates_; }

    nn::PolicyBundle bundle() {
        nn::PolicyBundle b;
        b.store(online_, "");
        b.meta["agent"] = "td3";
        b.meta["dim"] = dim_;
        b.meta["action_range"] = cfg_.action_range;
        return b;
    }

    void load(const nn::PolicyBundle& b) {
        b.restore(online_, "");
        nn::hard_update(target_, online_);
    }

private:
    Mat critic_targets(const std::vector<const SmoothTransition*>& batch, const nn::GraphBatch& g2, Rng& rng) {
        const auto n = static_cast<Eigen::Index>(batch.size());
        Mat y(n, 1);
        nn::NoGrad ng;
        const auto enc2 = target_.encoder.forward(g2, nn::BnMode::BatchStats);
        const auto h2 = gather_rows(enc2, g2.centers);
        Mat a2 = policy(target_, h2).value();
        const double range = cfg_.action_range;
        for (Eigen::Index i = 0; i < a2.size(); ++i) {
            const double eps = std::clamp(normal(rng) * cfg_.target_noise * range, -cfg_.target_noise_clip * range,
                                          cfg_.target_noise_clip * range);
            a2.data()[i] = static_cast<S>(std::clamp(static_cast<double>(a2.data()[i]) + eps, -range, range));
        }
        const T sa2 = concat_cols(h2, T(Mat(a2 * inv_range())));
        const Mat q1 = target_.critic1.forward(sa2).value();
        const Mat q2 = target_.critic2.forward(sa2).value();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto* tr = batch[static_cast<std::size_t>(i)];
            const double boot = tr->done ? 0.0 : cfg_.discount * std::min(q1(i, 0), q2(i, 0));
            y(i, 0) = static_cast<S>(tr->reward + boot);
        }
        return y;
    }

    // critics see actions rescaled to [-1, 1]
    S inv_range() const { return static_cast<S>(1.0 / cfg_.action_range); }

    T policy(SmootherNets<S>& nets, const T& h) const {
        return scale(tanh(nets.actor.forward(h)), static_cast<S>(cfg_.action_range));
    }

    int dim_;
    Td3Config cfg_;
    Rng init_rng_;
    SmootherNets<S> online_, target_;
    nn::Adam<S> critic_opt_, actor_opt_;
    long updates_ = 0;
};

}  // namespace meshforge::agents
