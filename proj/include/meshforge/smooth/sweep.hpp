#pragma once

#include "meshforge/mesh/patch.hpp"
#include "meshforge/mesh/tri_mesh.hpp"

#include <functional>

namespace meshforge {

/// Patch-level smoother: returns the new free-node position in mesh
/// coordinates.
using PatchSmoother = std::function<Vec3(const NodePatch&)>;

/// Run `sweeps` Gauss-Seidel passes over the interior nodes in index order.
inline void smooth_sweeps(TriMesh& mesh, const PatchSmoother& f, int sweeps) {
    const auto interior = mesh.interior_nodes();
    for (int s = 0; s < sweeps; ++s) {
        for (Index v : interior) {
            mesh.set_node(v, f(extract_patch(mesh, v)));
        }
    }
}

}  // namespace meshforge
