#pragma once

#include "meshforge/mesh/tri_mesh.hpp"

#include <string>
#include <vector>

namespace meshforge {

class FlipRejected : public MeshError {
public:
    using MeshError::MeshError;
};

/// Flippable edges around an interior node, as the far endpoint of each
/// edge. The order is the node's ring order (counter-clockwise from the
/// lowest-index neighbor) and binds Q-network outputs to edges.
inline std::vector<Index> candidate_edges(const TriMesh& mesh, Index v) {
    if (mesh.is_boundary(v)) {
        throw MeshError("node " + std::to_string(v) + " is on the boundary");
    }
    return mesh.ring(v);
}

struct FlipPlan {
    Index t1 = -1;
    Index t2 = -1;
    Tri new1{};
    Tri new2{};
};

namespace detail {

inline int slot_of(const Tri& t, Index v) { return t[0] == v ? 0 : (t[1] == v ? 1 : (t[2] == v ? 2 : -1)); }

// Rotate `t` so it reads (u, v, w) for the directed edge u -> v, if present.
inline bool directed(const Tri& t, Index u, Index v, Index& w) {
    const int k = slot_of(t, u);
    if (k < 0 || t[static_cast<std::size_t>((k + 1) % 3)] != v) return false;
    w = t[static_cast<std::size_t>((k + 2) % 3)];
    return true;
}

}  // namespace detail

/// Check whether (u, v) can be flipped and return the replacement triangles.
/// An empty message means the flip is legal.
inline std::string plan_flip(const TriMesh& mesh, Index u, Index v, FlipPlan& plan) {
    const auto tris = mesh.edge_triangles(u, v);
    if (tris.size() != 2) return "edge is on the boundary";
    Index a = -1, b = -1;
    Index t1 = tris[0], t2 = tris[1];
    if (!detail::directed(mesh.triangle(t1), u, v, a)) std::swap(t1, t2);
    if (!detail::directed(mesh.triangle(t1), u, v, a) || !detail::directed(mesh.triangle(t2), v, u, b)) {
        return "inconsistent triangle orientation";
    }
    if (a == b) return "degenerate quad";
    for (Index w : mesh.neighbors(a)) {
        if (w == b) return "opposite diagonal already exists";
    }
    // Quad u, b, v, a in counter-clockwise order; the new diagonal is a-b.
    const Tri n1{a, u, b};
    const Tri n2{b, v, a};
    const Vec3& xu = mesh.node(u);
    const Vec3& xv = mesh.node(v);
    const Vec3& xa = mesh.node(a);
    const Vec3& xb = mesh.node(b);
    if (mesh.dim() == 2) {
        // Strict convexity: all four corner triangles positively oriented.
        if (!(signed_area(xa, xu, xb) > 0.0) || !(signed_area(xb, xv, xa) > 0.0) ||
            !(signed_area(xu, xv, xa) > 0.0) || !(signed_area(xv, xu, xb) > 0.0)) {
            return "quad is not strictly convex";
        }
    } else {
        const Vec3 ref = area_normal(xu, xv, xa) + area_normal(xv, xu, xb);
        if (!(area_normal(xa, xu, xb).dot(ref) > 0.0) || !(area_normal(xb, xv, xa).dot(ref) > 0.0) ||
            !(area_normal(xu, xv, xa).dot(ref) > 0.0) || !(area_normal(xv, xu, xb).dot(ref) > 0.0)) {
            return "quad is not strictly convex";
        }
    }
    plan = {t1, t2, n1, n2};
    return {};
}

/// Flip (u, v) if legal; leaves the mesh untouched otherwise.
inline bool try_flip_edge(TriMesh& mesh, Index u, Index v) {
    FlipPlan plan;
    if (!plan_flip(mesh, u, v, plan).empty()) return false;
    mesh.replace_triangle_pair(plan.t1, plan.new1, plan.t2, plan.new2);
    return true;
}

/// Flip (u, v); throws FlipRejected without mutating the mesh if illegal.
inline void flip_edge(TriMesh& mesh, Index u, Index v) {
    FlipPlan plan;
    const std::string why = plan_flip(mesh, u, v, plan);
    if (!why.empty()) {
        throw FlipRejected("cannot flip edge (" + std::to_string(u) + ", " + std::to_string(v) + "): " + why);
    }
    mesh.replace_triangle_pair(plan.t1, plan.new1, plan.t2, plan.new2);
}

/// Quad opposite to (u, v) as {u, b, v, a}; empty when the edge is on the
/// boundary.
inline std::vector<Index> flip_quad(const TriMesh& mesh, Index u, Index v) {
    const auto tris = mesh.edge_triangles(u, v);
    if (tris.size() != 2) return {};
    Index a = -1, b = -1;
    Index t1 = tris[0], t2 = tris[1];
    if (!detail::directed(mesh.triangle(t1), u, v, a)) std::swap(t1, t2);
    if (!detail::directed(mesh.triangle(t1), u, v, a) || !detail::directed(mesh.triangle(t2), v, u, b)) return {};
    return {u, b, v, a};
}

}  // namespace meshforge
