#pragma once

#include "meshforge/agents/d3qn.hpp"
#include "meshforge/agents/td3.hpp"
#include "meshforge/edge/flip.hpp"
#include "meshforge/rl/flip_env.hpp"

#include <stdexcept>
#include <string>

namespace meshforge {

/// Trained node-smoothing policy loaded from a bundle.
class SmootherPolicy {
public:
    explicit SmootherPolicy(const nn::PolicyBundle& b)
        : agent_(b.meta.value("dim", 2), config_from(b), 0) {
        if (b.meta.value("agent", std::string()) != "td3") throw std::invalid_argument("bundle does not hold a smoothing policy");
        agent_.load(b);
    }

    int dim() const { return agent_.dim(); }

    /// Displacement of the free node in normalized patch coordinates.
    Vec3 displacement(const NodePatch& p) { return agent_.act(nn::observe(p)); }

    /// New normalized center. The move is dropped if it would invert an
    /// incident element or, with `guard`, lower the patch's min q~.
    Vec3 propose(const NodePatch& p, bool guard = true) {
        const Vec3 x = p.center() + displacement(p);
        if (!all_valid_at(p, x)) return p.center();
        if (guard && phi_at(p, x, false) < phi(p, false)) return p.center();
        return x;
    }

private:
    static agents::Td3Config config_from(const nn::PolicyBundle& b) {
        agents::Td3Config c;
        c.action_range = b.meta.value("action_range", 0.25);
        return c;
    }
    agents::Td3Agent<float> agent_;
};

struct RlSmoothOptions {
    /// Reject moves that lower the patch's min q~ (as the smart Laplacian does).
    bool guard = true;
};

/// Gauss-Seidel sweeps over interior nodes in index order with the policy.
inline void rl_smooth(TriMesh& mesh, SmootherPolicy& policy, int sweeps, const RlSmoothOptions& opt = {}) {
    if (policy.dim() != mesh.dim()) {
        throw std::invalid_argument("policy was trained on " + std::to_string(policy.dim()) + "D meshes but the mesh is " +
                                    std::to_string(mesh.dim()) + "D");
    }
    const auto interior = mesh.interior_nodes();
    for (int s = 0; s < sweeps; ++s) {
        for (Index v : interior) {
            NodePatch p = extract_patch(mesh, v);
            p.set_center(policy.propose(p, opt.guard));
            write_back(mesh, p);
        }
    }
}

/// Trained edge-flipping policy loaded from a bundle.
class FlipPolicy {
public:
    explicit FlipPolicy(const nn::PolicyBundle& b) : agent_(2, agents::D3qnConfig{}, 0) {
        if (b.meta.value("agent", std::string()) != "d3qn") throw std::invalid_argument("bundle does not hold a flipping policy");
        min_degree_ = b.meta.value("min_degree", 7);
        agent_.load(b);
    }

    int min_degree() const { return min_degree_; }

    /// Greedy slot: 0 for no flip, i for the edge to ring node i.
    int choose(const NodePatch& p) {
        Rng unused(0);
        return agent_.act(nn::observe(p), 0.0, unused);
    }

private:
    agents::D3qnAgent<float> agent_;
    int min_degree_ = 7;
};

/// One pass of policy-chosen flips over interior nodes whose degree the
/// policy was trained on. A chosen flip is kept only when it is legal and
/// raises the min q~ of its quad. Returns the number of flips.
inline int rl_flip_pass(TriMesh& mesh, FlipPolicy& policy) {
    int flips = 0;
    for (Index v : mesh.interior_nodes()) {
        const int d = static_cast<int>(mesh.degree(v));
        if (d < policy.min_degree() || d > rl::max_ring) continue;
        const auto ring = mesh.ring(v);
        const int slot = policy.choose(extract_patch(mesh, v));
        if (slot <= 0) continue;
        const Index other = ring[static_cast<std::size_t>(slot - 1)];
        FlipPlan plan;
        if (!plan_flip(mesh, v, other, plan).empty()) continue;
        auto q = [&](const Tri& t) { return shape_quality(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2])); };
        const double before = rl::edge_pair_quality(mesh, v, other);
        const double after = std::min(q(plan.new1), q(plan.new2));
        if (!(after > before)) continue;
        mesh.replace_triangle_pair(plan.t1, plan.new1, plan.t2, plan.new2);
        ++flips;
    }
    return flips;
}

/// Each sweep runs a flip pass followed by a smoothing sweep.
inline void rl_flip_smooth(TriMesh& mesh, SmootherPolicy& smoother, FlipPolicy& flipper, int sweeps,
                           const RlSmoothOptions& opt = {}) {
    for (int s = 0; s < sweeps; ++s) {
        rl_flip_pass(mesh, flipper);
        rl_smooth(mesh, smoother, 1, opt);
    }
}

}  // namespace meshforge
