#pragma once

#include "meshforge/rl/smooth_env.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace meshforge::rl {

using SmoothPolicyFn = std::function<Vec3(const SmoothEnvState&)>;

/// Mean undiscounted episode return of `policy` over `episodes` resets.
inline double mean_episode_return(const SmoothEnv& env, const SmoothPolicyFn& policy, int episodes, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("need at least one episode");
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        auto s = env.reset(rng);
        for (bool done = false; !done;) {
            const auto r = env.step(s, policy(s));
            total += r.reward;
            done = r.done;
        }
    }
    return total / episodes;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares line y = slope * x + intercept with its coefficient of
/// determination.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

}  // namespace meshforge::rl
