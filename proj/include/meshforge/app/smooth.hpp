#pragma once

#include "meshforge/app/config.hpp"
#include "meshforge/smooth/classic.hpp"
#include "meshforge/smooth/rl_smooth.hpp"
#include "meshforge/smooth/sweep.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace meshforge::app {

inline constexpr int report_schema = 1;

enum class Method { Laplacian, Smart, Angle, Getme, Opt, Rl, RlFlip };

inline Method method_from_string(const std::string& s) {
    if (s == "laplacian") return Method::Laplacian;
    if (s == "smart") return Method::Smart;
    if (s == "angle") return Method::Angle;
    if (s == "getme") return Method::Getme;
    if (s == "opt") return Method::Opt;
    if (s == "rl") return Method::Rl;
    if (s == "rl+flip") return Method::RlFlip;
    throw InputError("unknown smoothing method '" + s + "'");
}

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Laplacian: return "laplacian";
        case Method::Smart: return "smart";
        case Method::Angle: return "angle";
        case Method::Getme: return "getme";
        case Method::Opt: return "opt";
        case Method::Rl: return "rl";
        case Method::RlFlip: return "rl+flip";
    }
    return "?";
}

struct SmoothRequest {
    Method method = Method::Smart;
    int sweeps = 10;
    /// Smoothing policy for rl and rl+flip; flipping policy for rl+flip.
    std::shared_ptr<SmootherPolicy> smoother;
    std::shared_ptr<FlipPolicy> flipper;
    RlSmoothOptions rl;
};

inline nlohmann::json quality_summary(const TriMesh& m) {
    const auto s = mesh_stats(m);
    return {{"q_min", s.q_min},
            {"q_mean", s.q_mean},
            {"min_angle_mean", s.min_angle_mean},
            {"inverted", s.inverted},
            {"histogram", quality_histogram(m, 20)}};
}

struct SmoothOutcome {
    nlohmann::json report;
    double seconds = 0.0;
    double seconds_per_node = 0.0;
};

/// Runs the requested sweeps in place and reports quality before and after
/// plus wall time per node visit.
inline SmoothOutcome run_smoothing(TriMesh& mesh, const SmoothRequest& req) {
    if (req.sweeps < 0) throw InputError("sweeps must be non-negative");
    if ((req.method == Method::Rl || req.method == Method::RlFlip) && !req.smoother) {
        throw InputError("method " + to_string(req.method) + " needs a smoothing bundle");
    }
    if (req.method == Method::RlFlip && !req.flipper) throw InputError("method rl+flip needs a flipping bundle");
    if (req.method == Method::RlFlip && mesh.dim() != 2) throw InputError("edge flipping is 2D only");

    SmoothOutcome out;
    nlohmann::json r{{"schema", report_schema},
                     {"method", to_string(req.method)},
                     {"sweeps", req.sweeps},
                     {"dim", mesh.dim()},
                     {"nodes", mesh.node_count()},
                     {"interior_nodes", mesh.interior_nodes().size()},
                     {"triangles", mesh.triangle_count()},
                     {"before", quality_summary(mesh)}};
    int flips = 0;
    const auto t0 = std::chrono::steady_clock::now();
    switch (req.method) {
        case Method::Laplacian: smooth_sweeps(mesh, laplacian, req.sweeps); break;
        case Method::Smart: smooth_sweeps(mesh, smart_laplacian, req.sweeps); break;
        case Method::Angle: smooth_sweeps(mesh, angle_based, req.sweeps); break;
        case Method::Getme: getme_smooth(mesh, req.sweeps); break;
        case Method::Opt: smooth_sweeps(mesh, [](const NodePatch& p) { return opt_smooth(p); }, req.sweeps); break;
        case Method::Rl: rl_smooth(mesh, *req.smoother, req.sweeps, req.rl); break;
        case Method::RlFlip:
            for (int s = 0; s < req.sweeps; ++s) {
                flips += rl_flip_pass(mesh, *req.flipper);
                rl_smooth(mesh, *req.smoother, 1, req.rl);
            }
            break;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double visits = static_cast<double>(mesh.interior_nodes().size()) * std::max(req.sweeps, 1);
    out.seconds_per_node = visits > 0 ? out.seconds / visits : 0.0;
    r["after"] = quality_summary(mesh);
    r["seconds"] = out.seconds;
    r["seconds_per_node"] = out.seconds_per_node;
    if (req.method == Method::RlFlip) r["flips"] = flips;
    if (req.method == Method::Rl || req.method == Method::RlFlip) r["guard"] = req.rl.guard;
    out.report = std::move(r);
    return out;
}

}  // namespace meshforge::app
