#pragma once

#include "meshforge/edge/flip.hpp"
#include "meshforge/mesh/patch.hpp"
#include "meshforge/rl/reward.hpp"
#include "meshforge/util/random.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace meshforge::rl {

struct FlipEnvConfig {
    int max_steps = 2;
    /// Episodes start only at interior nodes with at least this degree.
    int min_degree = 7;
};

struct FlipEnvState {
    std::shared_ptr<TriMesh> mesh;  // working copy
    Index center = -1;
    NodePatch patch;
    int t = 0;
};

struct FlipStepResult {
    double reward = 0.0;
    bool done = false;
    bool flipped = false;
};

/// Min q~ of the two triangles sharing (u, v).
inline double edge_pair_quality(const TriMesh& m, Index u, Index v) {
    double q = 1.0;
    for (Index t : m.edge_triangles(u, v)) {
        const Tri& tri = m.triangle(t);
        q = std::min(q, shape_quality(m.node(tri[0]), m.node(tri[1]), m.node(tri[2])));
    }
    return q;
}

/// Apply flip action `slot` at `center`: 0 keeps the mesh, i >= 1 flips the
/// edge to ring node i. Unflippable edges leave the mesh unchanged and score
/// like a degrading flip; a legal flip scores +1 only if the min q~ of the
/// quad's two triangles strictly increases.
inline FlipStepResult apply_flip_action(TriMesh& mesh, Index center, const std::vector<Index>& ring, int slot) {
    FlipStepResult r;
    if (slot == 0) {
        r.reward = flip_noop;
        return r;
    }
    if (slot < 0 || slot > static_cast<int>(ring.size())) throw std::out_of_range("flip action outside the ring");
    const Index other = ring[static_cast<std::size_t>(slot - 1)];
    FlipPlan plan;
    if (!plan_flip(mesh, center, other, plan).empty()) {
        r.reward = flip_worse;
        return r;
    }
    const double before = edge_pair_quality(mesh, center, other);
    mesh.replace_triangle_pair(plan.t1, plan.new1, plan.t2, plan.new2);
    const Index a = plan.new1[0], b = plan.new1[2];
    const double after = edge_pair_quality(mesh, a, b);
    r.flipped = true;
    r.reward = after > before ? flip_improved : flip_worse;
    return r;
}

/// Edge-flipping MDP. Each episode owns a copy of its mesh and keeps the
/// same center node after a flip.
class FlipEnv {
public:
    FlipEnv(std::shared_ptr<const std::vector<TriMesh>> meshes, FlipEnvConfig cfg)
        : meshes_(std::move(meshes)), cfg_(cfg) {
        if (!meshes_ || meshes_->empty()) throw std::invalid_argument("flip environment needs at least one mesh");
        for (std::size_t m = 0; m < meshes_->size(); ++m) {
            const TriMesh& mesh = (*meshes_)[m];
            for (Index v : mesh.interior_nodes()) {
                const int d = static_cast<int>(mesh.degree(v));
                if (d >= cfg_.min_degree && d <= max_ring) nodes_.emplace_back(m, v);
            }
        }
        if (nodes_.empty()) throw std::invalid_argument("dataset has no eligible nodes for flipping");
    }

    const FlipEnvConfig& config() const { return cfg_; }
    std::size_t node_count() const { return nodes_.size(); }

    FlipEnvState reset(Rng& rng) const {
        const auto& [m, v] = nodes_[uniform_index(rng, nodes_.size())];
        return start((*meshes_)[m], v);
    }

    FlipEnvState start(const TriMesh& mesh, Index v) const {
        FlipEnvState s;
        s.mesh = std::make_shared<TriMesh>(mesh);
        s.center = v;
        s.patch = extract_patch(*s.mesh, v);
        return s;
    }

    FlipStepResult step(FlipEnvState& s, int slot) const {
        const auto ring = s.mesh->ring(s.center);
        auto r = apply_flip_action(*s.mesh, s.center, ring, slot);
        ++s.t;
        if (r.flipped) s.patch = extract_patch(*s.mesh, s.center);
        r.done = s.t >= cfg_.max_steps || r.reward == flip_worse || static_cast<int>(s.patch.ring_size()) > max_ring;
        return r;
    }

private:
    std::shared_ptr<const std::vector<TriMesh>> meshes_;
    FlipEnvConfig cfg_;
    std::vector<std::pair<std::size_t, Index>> nodes_;
};

}  // namespace meshforge::rl
