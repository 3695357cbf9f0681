#pragma once

#include "meshforge/data/delaunay.hpp"
#include "meshforge/edge/flip.hpp"
#include "meshforge/util/random.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace meshforge {

struct CraftedMesh {
    TriMesh mesh;
    /// Nodes whose degree was raised by flipping.
    std::vector<Index> targets;
};

/// Random Delaunay mesh with bad connectivity planted around a few nodes:
/// edges opposite each target node are flipped towards it until its degree
/// reaches `min_degree`, which leaves slivers around the target.
inline CraftedMesh crafted_mesh(int n_interior, int n_targets, std::uint64_t seed, int min_degree = 9) {
    CraftedMesh out{delaunay_mesh(n_interior, seed), {}};
    TriMesh& m = out.mesh;
    Rng rng(derive_seed(seed, 17));
    std::vector<Index> order = m.interior_nodes();
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> blocked(m.node_count(), 0);
    for (Index v : order) {
        if (static_cast<int>(out.targets.size()) >= n_targets) break;
        if (blocked[static_cast<std::size_t>(v)]) continue;
        bool ring_interior = true;
        for (Index w : m.neighbors(v)) ring_interior = ring_interior && !m.is_boundary(w);
        if (!ring_interior) continue;
        bool progress = true;
        while (static_cast<int>(m.degree(v)) < min_degree && progress) {
            progress = false;
            const auto ring = m.ring(v);
            for (std::size_t i = 0; i < ring.size() && !progress; ++i) {
                progress = try_flip_edge(m, ring[i], ring[(i + 1) % ring.size()]);
            }
        }
        if (static_cast<int>(m.degree(v)) < min_degree) continue;
        out.targets.push_back(v);
        // keep later targets out of this node's two-ring
        for (Index w : m.neighbors(v)) {
            blocked[static_cast<std::size_t>(w)] = 1;
            for (Index x : m.neighbors(w)) blocked[static_cast<std::size_t>(x)] = 1;
        }
    }
    return out;
}

}  // namespace meshforge
