#pragma once

#include "meshforge/agents/d3qn.hpp"
#include "meshforge/agents/td3.hpp"
#include "meshforge/rl/flip_env.hpp"
#include "meshforge/rl/smooth_env.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshforge::agents {

/// Training hit a NaN or infinity.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CurvePoint {
    long step = 0;
    double windowed_reward = 0.0;
    double loss = 0.0;        // critic or Q loss, averaged over the window
    double actor_loss = 0.0;  // TD3 only
};

struct TrainResult {
    nn::PolicyBundle bundle;
    std::vector<CurvePoint> curve;
    long positive_rewards = 0;
    long negative_rewards = 0;

    double final_window() const { return curve.empty() ? 0.0 : curve.back().windowed_reward; }
    double top_window() const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : curve) best = std::max(best, p.windowed_reward);
        return curve.empty() ? 0.0 : best;
    }
    double positive_ratio() const {
        return negative_rewards > 0 ? static_cast<double>(positive_rewards) / static_cast<double>(negative_rewards)
                                    : static_cast<double>(positive_rewards);
    }
};

inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "step,windowed_reward,loss,actor_loss\n";
    for (const auto& p : curve) out << p.step << ',' << p.windowed_reward << ',' << p.loss << ',' << p.actor_loss << '\n';
}

struct SmootherTrainConfig {
    Td3Config td3;
    rl::SmoothEnvConfig env;
    int window = 1000;
};

/// Rolling reward window and loss accumulators for the curve.
class CurveLogger {
public:
    explicit CurveLogger(int window) : window_(std::max(window, 1)) {}

    void reward(double r) {
        rewards_.push_back(r);
        sum_ += r;
        if (static_cast<int>(rewards_.size()) > window_) {
            sum_ -= rewards_.front();
            rewards_.pop_front();
        }
    }
    void loss(double l) {
        loss_sum_ += l;
        ++loss_n_;
    }
    void actor_loss(double l) {
        actor_sum_ += l;
        ++actor_n_;
    }
    void maybe_emit(long step, std::vector<CurvePoint>& curve) {
        if ((step + 1) % window_ == 0) emit(step, curve);
    }
    /// Closes a trailing partial window.
    void finish(long steps, std::vector<CurvePoint>& curve) {
        if (steps > 0 && (curve.empty() || curve.back().step != steps)) emit(steps - 1, curve);
    }

private:
    void emit(long step, std::vector<CurvePoint>& curve) {
        CurvePoint p;
        p.step = step + 1;
        p.windowed_reward = rewards_.empty() ? 0.0 : sum_ / static_cast<double>(rewards_.size());
        p.loss = loss_n_ ? loss_sum_ / loss_n_ : 0.0;
        p.actor_loss = actor_n_ ? actor_sum_ / actor_n_ : 0.0;
        curve.push_back(p);
        loss_sum_ = actor_sum_ = 0.0;
        loss_n_ = actor_n_ = 0;
    }

    int window_;
    std::deque<double> rewards_;
    double sum_ = 0.0, loss_sum_ = 0.0, actor_sum_ = 0.0;
    long loss_n_ = 0, actor_n_ = 0;
};

/// TD3 training of the node-smoothing agent. Exploration noise decays
/// linearly from `exploration_noise` to `exploration_noise_final` (both
/// fractions of the action range); the first `start_steps` actions are
/// uniform in the action box.
inline TrainResult train_smoother(std::shared_ptr<const std::vector<TriMesh>> meshes, SmootherTrainConfig cfg,
                                  long steps, std::uint64_t seed) {
    cfg.env.action_range = cfg.td3.action_range;
    rl::SmoothEnv env(std::move(meshes), cfg.env);
    const int dim = env.dim();
    Td3Agent<float> agent(dim, cfg.td3, derive_seed(seed, 1));
    ReplayBuffer<SmoothTransition> buffer(cfg.td3.buffer);
    Rng env_rng(derive_seed(seed, 2)), noise_rng(derive_seed(seed, 3)), sample_rng(derive_seed(seed, 4));
    TrainResult res;
    CurveLogger log(cfg.window);
    const double range = cfg.td3.action_range;

    auto state = env.reset(env_rng);
    auto obs = nn::observe(state.patch);
    long step = 0;
    try {
        for (; step < steps; ++step) {
            Vec3 a = Vec3::Zero();
            if (step < cfg.td3.start_steps) {
                for (int c = 0; c < dim; ++c) a[c] = uniform(noise_rng, -range, range);
            } else {
                const double frac = steps > 1 ? static_cast<double>(step) / static_cast<double>(steps - 1) : 1.0;
                const double sigma =
                    (cfg.td3.exploration_noise + frac * (cfg.td3.exploration_noise_final - cfg.td3.exploration_noise)) *
                    range;
                a = agent.act(obs);
                for (int c = 0; c < dim; ++c) a[c] = std::clamp(a[c] + sigma * normal(noise_rng), -range, range);
            }
            const auto r = env.step(state, a);
            auto next = nn::observe(state.patch);
            if (r.reward > 0) ++res.positive_rewards;
            if (r.reward < 0) ++res.negative_rewards;
            log.reward(r.reward);
            buffer.push({obs, a, r.reward, next, r.done});
            if (r.done) {
                state = env.reset(env_rng);
                obs = nn::observe(state.patch);
            } else {
                obs = std::move(next);
            }
            if (step >= cfg.td3.start_steps && buffer.size() >= static_cast<std::size_t>(cfg.td3.batch)) {
                for (int u = 0; u < cfg.td3.updates_per_step; ++u) {
                    const auto l =
                        agent.update(buffer.sample(static_cast<std::size_t>(cfg.td3.batch), sample_rng), sample_rng);
                    log.loss(l.critic);
                    if (l.actor_updated) log.actor_loss(l.actor);
                }
            }
            log.maybe_emit(step, res.curve);
        }
    } catch (const nn::NonFiniteError& e) {
        throw TrainingDiverged("smoother training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    log.finish(steps, res.curve);
    res.bundle = agent.bundle();
    res.bundle.meta["kind"] = dim == 3 ? "smoother3d" : "smoother";
    res.bundle.meta["reward"] = rl::to_string(cfg.env.reward.variant);
    res.bundle.meta["surface_reward"] = cfg.env.surface_reward;
    if (dim == 3 && !cfg.env.surface_reward) res.bundle.meta["flag"] = "no-rf";
    res.bundle.meta["max_steps"] = cfg.env.max_steps;
    res.bundle.meta["steps"] = steps;
    res.bundle.meta["seed"] = seed;
    return res;
}

struct FlipperTrainConfig {
    D3qnConfig d3qn;
    rl::FlipEnvConfig env;
    int window = 1000;
};

/// Double DQN training of the edge-flipping agent; epsilon decays linearly
/// over the run.
inline TrainResult train_flipper(std::shared_ptr<const std::vector<TriMesh>> meshes, FlipperTrainConfig cfg,
                                 long steps, std::uint64_t seed) {
    rl::FlipEnv env(std::move(meshes), cfg.env);
    D3qnAgent<float> agent(2, cfg.d3qn, derive_seed(seed, 1));
    ReplayBuffer<FlipTransition> buffer(cfg.d3qn.buffer);
    Rng env_rng(derive_seed(seed, 2)), act_rng(derive_seed(seed, 3)), sample_rng(derive_seed(seed, 4));
    TrainResult res;
    CurveLogger log(cfg.window);

    auto state = env.reset(env_rng);
    auto obs = nn::observe(state.patch);
    long step = 0;
    try {
        for (; step < steps; ++step) {
            const double frac = steps > 1 ? static_cast<double>(step) / static_cast<double>(steps - 1) : 1.0;
            const double eps = step < cfg.d3qn.start_steps
                                   ? 1.0
                                   : cfg.d3qn.epsilon_start + frac * (cfg.d3qn.epsilon_final - cfg.d3qn.epsilon_start);
            const int a = agent.act(obs, eps, act_rng);
            const auto r = env.step(state, a);
            auto next = nn::observe(state.patch);
            if (r.reward > 0) ++res.positive_rewards;
            if (r.reward < 0) ++res.negative_rewards;
            log.reward(r.reward);
            buffer.push({obs, a, r.reward, next, r.done});
            if (r.done) {
                state = env.reset(env_rng);
                obs = nn::observe(state.patch);
            } else {
                obs = std::move(next);
            }
            if (step >= cfg.d3qn.start_steps && buffer.size() >= static_cast<std::size_t>(cfg.d3qn.batch)) {
                log.loss(agent.update(buffer.sample(static_cast<std::size_t>(cfg.d3qn.batch), sample_rng)));
            }
            log.maybe_emit(step, res.curve);
        }
    } catch (const nn::NonFiniteError& e) {
        throw TrainingDiverged("flipper training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    log.finish(steps, res.curve);
    res.bundle = agent.bundle();
    res.bundle.meta["kind"] = "flipper";
    res.bundle.meta["min_degree"] = cfg.env.min_degree;
    res.bundle.meta["steps"] = steps;
    res.bundle.meta["seed"] = seed;
    return res;
}

}  // namespace meshforge::agents
