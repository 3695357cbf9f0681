#pragma once

#include "meshforge/app/config.hpp"
#include "meshforge/rl/rollout.hpp"
#include "meshforge/smooth/rl_smooth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace meshforge::app {

/// Worker cap from MESHFORGE_THREADS (default: hardware concurrency).
inline int worker_count() {
    if (const char* env = std::getenv("MESHFORGE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs jobs 0..n-1 on up to `workers` threads. Jobs must be independent;
/// each one stays deterministic, so results do not depend on the worker
/// count. The first exception is rethrown after all workers stop.
inline void run_jobs(int n, int workers, const std::function<void(int)>& job) {
    workers = std::clamp(workers, 1, std::max(n, 1));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i; (i = next++) < n;) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Quality of each held-out mesh after `sweeps` sweeps of the policy.
inline std::vector<MeshStats> evaluate_smoother(const nn::PolicyBundle& bundle, const std::vector<TriMesh>& meshes,
                                                int sweeps, RlSmoothOptions opt = {}) {
    SmootherPolicy policy(bundle);
    std::vector<MeshStats> out;
    for (TriMesh m : meshes) {
        rl_smooth(m, policy, sweeps, opt);
        out.push_back(mesh_stats(m));
    }
    return out;
}

/// Mean greedy return of a smoothing policy in `env`.
inline double greedy_return(const nn::PolicyBundle& bundle, const rl::SmoothEnv& env, int episodes, std::uint64_t seed) {
    SmootherPolicy policy(bundle);
    Rng rng(seed);
    return rl::mean_episode_return(
        env, [&](const rl::SmoothEnvState& s) { return policy.displacement(s.patch); }, episodes, rng);
}

enum class AblationKind { ActionRange, Reward, EpisodeLength };

inline AblationKind ablation_from_string(const std::string& s) {
    if (s == "action-range") return AblationKind::ActionRange;
    if (s == "reward") return AblationKind::Reward;
    if (s == "episode-length") return AblationKind::EpisodeLength;
    throw InputError("unknown ablation '" + s + "'");
}

struct AblationRequest {
    AblationKind kind = AblationKind::ActionRange;
    std::shared_ptr<const std::vector<TriMesh>> train;
    /// Held-out meshes for the reward study and the episode-length returns.
    std::vector<TriMesh> eval;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    long steps = 20000;
    TrainSettings base;
    int sweeps = 10;
    int episodes = 1000;
    int workers = 1;
    std::function<void(const std::string&)> log;
};

/// One summary line: metric over seeds for one configuration.
struct AblationRow {
    std::string config;
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

inline AblationRow summarize(const std::string& config, const std::string& metric, const std::vector<double>& v) {
    AblationRow r{config, metric, 0.0, 0.0, v.size()};
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(std::max<std::size_t>(v.size(), 1));
    for (double x : v) r.std += (x - r.mean) * (x - r.mean);
    r.std = v.size() > 1 ? std::sqrt(r.std / static_cast<double>(v.size() - 1)) : 0.0;
    return r;
}

inline void write_ablation_csv(std::ostream& out, const std::string& name, const std::vector<AblationRow>& rows) {
    out << "ablation,config,metric,mean,std,n\n";
    out.precision(9);
    for (const auto& r : rows) out << name << ',' << r.config << ',' << r.metric << ',' << r.mean << ',' << r.std << ',' << r.n << '\n';
}

inline std::vector<AblationRow> run_ablation(const AblationRequest& req) {
    struct Config {
        std::string name;
        TrainSettings settings;
    };
    std::vector<Config> configs;
    switch (req.kind) {
        case AblationKind::ActionRange:
            for (double r : {0.25, 0.5, 0.75, 1.0}) {
                Config c{"range=" + std::to_string(r).substr(0, 4), req.base};
                c.settings.smoother.td3.action_range = r;
                configs.push_back(c);
            }
            break;
        case AblationKind::Reward:
            for (auto v : rl::all_reward_variants) {
                Config c{rl::to_string(v), req.base};
                c.settings.smoother.env.reward.variant = v;
                configs.push_back(c);
            }
            break;
        case AblationKind::EpisodeLength:
            for (int t : {2, 4, 8, 16, 32}) {
                Config c{"T=" + std::to_string(t), req.base};
                c.settings.smoother.env.reward.variant = rl::RewardVariant::GmsnetStyle;
                c.settings.smoother.env.max_steps = t;
                configs.push_back(c);
            }
            break;
    }
    if (req.kind != AblationKind::ActionRange && req.eval.empty()) throw InputError("ablation needs held-out meshes");

    struct Result {
        double top = 0, final = 0, ratio = 0, ret = 0;
        std::vector<MeshStats> eval;
    };
    const int n_seeds = static_cast<int>(req.seeds.size());
    std::vector<Result> results(configs.size() * req.seeds.size());
    std::mutex log_mutex;
    run_jobs(static_cast<int>(results.size()), req.workers, [&](int job) {
        const auto& cfg = configs[static_cast<std::size_t>(job / n_seeds)];
        const auto seed = req.seeds[static_cast<std::size_t>(job % n_seeds)];
        const auto res = agents::train_smoother(req.train, cfg.settings.smoother, req.steps, seed);
        Result& out = results[static_cast<std::size_t>(job)];
        out.top = res.top_window();
        out.final = res.final_window();
        out.ratio = res.positive_ratio();
        if (req.kind == AblationKind::Reward) out.eval = evaluate_smoother(res.bundle, req.eval, req.sweeps);
        if (req.kind == AblationKind::EpisodeLength) {
            rl::SmoothEnvConfig env_cfg = cfg.settings.smoother.env;
            env_cfg.action_range = cfg.settings.smoother.td3.action_range;
            rl::SmoothEnv env(std::make_shared<const std::vector<TriMesh>>(req.eval), env_cfg);
            out.ret = greedy_return(res.bundle, env, req.episodes, derive_seed(seed, 99));
        }
        if (req.log) {
            std::lock_guard lock(log_mutex);
            req.log(cfg.name + " seed " + std::to_string(seed) + ": top window " + std::to_string(out.top));
        }
    });

    std::vector<AblationRow> rows;
    std::vector<double> ts, rets;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<double> top, fin, ratio, ret, qmin, qmean;
        std::vector<std::vector<double>> per_mesh(req.eval.size());
        for (int s = 0; s < n_seeds; ++s) {
            const Result& r = results[c * req.seeds.size() + static_cast<std::size_t>(s)];
            top.push_back(r.top);
            fin.push_back(r.final);
            ratio.push_back(r.ratio);
            ret.push_back(r.ret);
            if (!r.eval.empty()) {
                double mn = 0, mm = 0;
                for (std::size_t m = 0; m < r.eval.size(); ++m) {
                    mn += r.eval[m].q_min;
                    mm += r.eval[m].q_mean;
                    per_mesh[m].push_back(r.eval[m].q_mean);
                }
                qmin.push_back(mn / static_cast<double>(r.eval.size()));
                qmean.push_back(mm / static_cast<double>(r.eval.size()));
            }
        }
        const std::string& name = configs[c].name;
        rows.push_back(summarize(name, "top_window_reward", top));
        rows.push_back(summarize(name, "final_window_reward", fin));
        rows.push_back(summarize(name, "positive_negative_ratio", ratio));
        if (req.kind == AblationKind::Reward) {
            rows.push_back(summarize(name, "eval_q_min", qmin));
            rows.push_back(summarize(name, "eval_q_mean", qmean));
            for (std::size_t m = 0; m < per_mesh.size(); ++m) {
                rows.push_back(summarize(name, "eval_q_mean_mesh" + std::to_string(m), per_mesh[m]));
            }
        }
        if (req.kind == AblationKind::EpisodeLength) {
            const auto r = summarize(name, "mean_return", ret);
            rows.push_back(r);
            ts.push_back(configs[c].settings.smoother.env.max_steps);
            rets.push_back(r.mean);
        }
    }
    if (req.kind == AblationKind::EpisodeLength) {
        const auto fit = rl::fit_line(ts, rets);
        rows.push_back({"fit", "return_vs_T_slope", fit.slope, 0.0, ts.size()});
        rows.push_back({"fit", "return_vs_T_r2", fit.r2, 0.0, ts.size()});
    }
    return rows;
}

}  // namespace meshforge::app
