#pragma once

#include "meshforge/mesh/patch.hpp"
#include "meshforge/rl/reward.hpp"
#include "meshforge/surface/quadric.hpp"
#include "meshforge/util/random.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace meshforge::rl {

/// Flattened copy of a surface patch in its own tangent frame: same nodes,
/// z dropped, validity judged by the sign of the projected area.
inline NodePatch project_to_tangent_plane(const NodePatch& p) {
    NodePatch q = p;
    q.dim = 2;
    q.reference_normals.clear();
    for (Vec3& x : q.coords) x.z() = 0.0;
    return q;
}

struct SmoothEnvConfig {
    RewardConfig reward;
    int max_steps = 2;
    double action_range = 0.25;
    /// 3D only: add the surface-fitting term to the reward.
    bool surface_reward = true;
};

struct SmoothEnvState {
    NodePatch patch;
    /// Tangent-plane copy used for the quality terms of surface patches.
    NodePatch flat;
    Quadric quadric;
    int t = 0;
    double phi_prev = 0.0;
    std::size_t mesh = 0;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
    /// Quality part of the reward and, in 3D, the surface term.
    double quality_reward = 0.0;
    double surface_term = 0.0;
};

/// Node-smoothing MDP over a fixed set of meshes. Episodes work on patch
/// copies; the meshes are never touched.
class SmoothEnv {
public:
    SmoothEnv(std::shared_ptr<const std::vector<TriMesh>> meshes, SmoothEnvConfig cfg)
        : meshes_(std::move(meshes)), cfg_(cfg) {
        if (!meshes_ || meshes_->empty()) throw std::invalid_argument("smoothing environment needs at least one mesh");
        if (cfg_.max_steps < 1) throw std::invalid_argument("max_steps must be positive");
        if (!(cfg_.action_range > 0.0 && cfg_.action_range <= 1.0)) {
            throw std::invalid_argument("action range must lie in (0, 1]");
        }
        dim_ = meshes_->front().dim();
        for (std::size_t m = 0; m < meshes_->size(); ++m) {
            if ((*meshes_)[m].dim() != dim_) throw std::invalid_argument("mixed 2D and 3D meshes");
            for (Index v : (*meshes_)[m].interior_nodes()) nodes_.emplace_back(m, v);
        }
        if (nodes_.empty()) throw std::invalid_argument("dataset has no interior nodes");
    }

    int dim() const { return dim_; }
    const SmoothEnvConfig& config() const { return cfg_; }
    std::size_t node_count() const { return nodes_.size(); }

    /// Start an episode at a node drawn uniformly from all interior nodes of
    /// all meshes.
    SmoothEnvState reset(Rng& rng) const {
        const auto& [m, v] = nodes_[uniform_index(rng, nodes_.size())];
        return start((*meshes_)[m], v, m);
    }

    SmoothEnvState start(const TriMesh& mesh, Index v, std::size_t mesh_id = 0) const {
        SmoothEnvState s;
        s.patch = extract_patch(mesh, v);
        s.mesh = mesh_id;
        if (dim_ == 3) {
            s.flat = project_to_tangent_plane(s.patch);
            s.quadric = fit_quadric(s.patch);
        }
        s.phi_prev = potential(s);
        return s;
    }

    /// Quality potential matching the configured reward (adaptive or plain).
    double potential(const SmoothEnvState& s) const {
        const NodePatch& q = quality_patch(s);
        return adaptive() ? phi_adaptive(q, q.center()) : phi_original(q, q.center());
    }

    /// Moves the free node by `action` (normalized units, clamped to the
    /// action box).
    StepResult step(SmoothEnvState& s, Vec3 action) const {
        for (int c = 0; c < 3; ++c) action[c] = std::clamp(action[c], -cfg_.action_range, cfg_.action_range);
        if (dim_ == 2) action.z() = 0.0;
        StepResult r;
        const Vec3 before = s.patch.center();
        const Vec3 after = before + action;
        if (dim_ == 2) {
            r.quality_reward = smooth_reward(cfg_.reward, s.patch, before, after);
            s.patch.set_center(after);
        } else {
            const Vec3 fb(before.x(), before.y(), 0.0), fa(after.x(), after.y(), 0.0);
            r.quality_reward = smooth_reward(cfg_.reward, s.flat, fb, fa);
            s.patch.set_center(after);
            s.flat.set_center(fa);
            if (cfg_.surface_reward) r.surface_term = surface_reward(after, s.quadric);
        }
        r.reward = r.quality_reward + r.surface_term;
        ++s.t;
        const NodePatch& q = quality_patch(s);
        r.done = s.t >= cfg_.max_steps || !all_valid_at(q, q.center());
        s.phi_prev = potential(s);
        return r;
    }

private:
    bool adaptive() const {
        return cfg_.reward.variant == RewardVariant::AdaptivePenalty ||
               cfg_.reward.variant == RewardVariant::AdvancementPlusAdaptive;
    }
    const NodePatch& quality_patch(const SmoothEnvState& s) const { return dim_ == 3 ? s.flat : s.patch; }

    std::shared_ptr<const std::vector<TriMesh>> meshes_;
    SmoothEnvConfig cfg_;
    int dim_ = 2;
    std::vector<std::pair<std::size_t, Index>> nodes_;
};

}  // namespace meshforge::rl
