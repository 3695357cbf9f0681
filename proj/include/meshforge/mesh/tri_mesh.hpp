#pragma once

#include "meshforge/mesh/geometry.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace meshforge {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Triangle mesh in 2D (z = 0) or 3D with derived node adjacency.
///
/// Node coordinates are always stored as 3-vectors. Boundary flags mark
/// nodes that touch an edge used by a single triangle; those nodes are
/// never moved by the smoothers.
class TriMesh {
public:
    TriMesh() = default;

    TriMesh(int dim, std::vector<Vec3> nodes, std::vector<Tri> triangles)
        : dim_(dim), nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
        if (dim_ != 2 && dim_ != 3) {
            throw MeshError("mesh dimension must be 2 or 3");
        }
        const auto n = static_cast<Index>(nodes_.size());
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const Tri& tri = triangles_[t];
            for (Index v : tri) {
                if (v < 0 || v >= n) {
                    throw MeshError("triangle " + std::to_string(t) + " references node " + std::to_string(v) +
                                    " outside [0, " + std::to_string(n) + ")");
                }
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
                throw MeshError("triangle " + std::to_string(t) + " repeats a node index");
            }
            if (dim_ == 2 && !(signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]) > 0.0)) {
                throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
            }
        }
        if (dim_ == 2) {
            for (Vec3& x : nodes_) {
                x.z() = 0.0;
            }
        }
        build_topology();
    }

    int dim() const { return dim_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    const std::vector<Vec3>& nodes() const { return nodes_; }
    const Vec3& node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
    void set_node(Index i, const Vec3& x) {
        nodes_[static_cast<std::size_t>(i)] = x;
        if (dim_ == 2) {
            nodes_[static_cast<std::size_t>(i)].z() = 0.0;
        }
    }

    const std::vector<Tri>& triangles() const { return triangles_; }
    const Tri& triangle(Index t) const { return triangles_[static_cast<std::size_t>(t)]; }

    const std::vector<bool>& boundary_flags() const { return boundary_; }
    bool is_boundary(Index v) const { return boundary_[static_cast<std::size_t>(v)]; }

    /// Sorted, duplicate-free neighbors of a node.
    std::span<const Index> neighbors(Index v) const { return neighbors_[static_cast<std::size_t>(v)]; }
    std::span<const Index> incident_triangles(Index v) const { return node_tris_[static_cast<std::size_t>(v)]; }
    std::size_t degree(Index v) const { return neighbors_[static_cast<std::size_t>(v)].size(); }

    std::vector<Index> interior_nodes() const {
        std::vector<Index> out;
        for (Index v = 0; v < static_cast<Index>(nodes_.size()); ++v) {
            if (!boundary_[static_cast<std::size_t>(v)] && !neighbors_[static_cast<std::size_t>(v)].empty()) {
                out.push_back(v);
            }
        }
        return out;
    }

    /// Ring of an interior node in counter-clockwise order (with respect to
    /// the triangle orientation), starting from its lowest-index neighbor.
    std::vector<Index> ring(Index v) const {
        if (is_boundary(v)) {
            throw MeshError("node " + std::to_string(v) + " is on the boundary");
        }
        const auto& tris = node_tris_[static_cast<std::size_t>(v)];
        if (tris.empty()) {
            throw MeshError("node " + std::to_string(v) + " is isolated");
        }
        // Each incident triangle (v, a, b) contributes the directed ring edge a -> b.
        std::vector<std::pair<Index, Index>> next;
        next.reserve(tris.size());
        for (Index t : tris) {
            const Tri& tri = triangles_[static_cast<std::size_t>(t)];
            const int k = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
            next.emplace_back(tri[(k + 1) % 3], tri[(k + 2) % 3]);
        }
        std::sort(next.begin(), next.end());
        const Index start = neighbors_[static_cast<std::size_t>(v)].front();
        std::vector<Index> out;
        out.reserve(next.size());
        Index cur = start;
        for (std::size_t i = 0; i < next.size(); ++i) {
            out.push_back(cur);
            auto it = std::lower_bound(next.begin(), next.end(), std::pair<Index, Index>(cur, -1));
            if (it == next.end() || it->first != cur) {
                throw MeshError("ring of node " + std::to_string(v) + " is not a closed fan");
            }
            cur = it->second;
        }
        if (cur != start) {
            throw MeshError("ring of node " + std::to_string(v) + " is not a closed fan");
        }
        return out;
    }

    /// Triangles sharing the undirected edge (u, v).
    std::vector<Index> edge_triangles(Index u, Index v) const {
        std::vector<Index> out;
        for (Index t : node_tris_[static_cast<std::size_t>(u)]) {
            const Tri& tri = triangles_[static_cast<std::size_t>(t)];
            if (tri[0] == v || tri[1] == v || tri[2] == v) {
                out.push_back(t);
            }
        }
        return out;
    }

    /// Replace the connectivity of two triangles in place and refresh the
    /// adjacency of the touched nodes. Used by edge flips.
    void replace_triangle_pair(Index t1, const Tri& new1, Index t2, const Tri& new2) {
        std::vector<Index> touched;
        for (Index v : triangles_[static_cast<std::size_t>(t1)]) touched.push_back(v);
        for (Index v : triangles_[static_cast<std::size_t>(t2)]) touched.push_back(v);
        for (Index v : new1) touched.push_back(v);
        for (Index v : new2) touched.push_back(v);
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

        for (Index v : touched) {
            auto& lst = node_tris_[static_cast<std::size_t>(v)];
            lst.erase(std::remove_if(lst.begin(), lst.end(), [&](Index t) { return t == t1 || t == t2; }), lst.end());
        }
        triangles_[static_cast<std::size_t>(t1)] = new1;
        triangles_[static_cast<std::size_t>(t2)] = new2;
        for (Index v : new1) node_tris_[static_cast<std::size_t>(v)].push_back(t1);
        for (Index v : new2) node_tris_[static_cast<std::size_t>(v)].push_back(t2);
        for (Index v : touched) {
            auto& lst = node_tris_[static_cast<std::size_t>(v)];
            std::sort(lst.begin(), lst.end());
            rebuild_neighbors(v);
        }
    }

private:
    void rebuild_neighbors(Index v) {
        auto& nb = neighbors_[static_cast<std::size_t>(v)];
        nb.clear();
        for (Index t : node_tris_[static_cast<std::size_t>(v)]) {
            for (Index w : triangles_[static_cast<std::size_t>(t)]) {
                if (w != v) nb.push_back(w);
            }
        }
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    void build_topology() {
        const std::size_t n = nodes_.size();
        node_tris_.assign(n, {});
        neighbors_.assign(n, {});
        boundary_.assign(n, false);
        std::vector<std::pair<Index, Index>> edges;
        edges.reserve(triangles_.size() * 3);
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const Tri& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                node_tris_[static_cast<std::size_t>(tri[k])].push_back(static_cast<Index>(t));
                const Index a = tri[k];
                const Index b = tri[(k + 1) % 3];
                edges.emplace_back(std::min(a, b), std::max(a, b));
            }
        }
        std::sort(edges.begin(), edges.end());
        for (std::size_t i = 0; i < edges.size();) {
            std::size_t j = i;
            while (j < edges.size() && edges[j] == edges[i]) ++j;
            const std::size_t count = j - i;
            if (count > 2) {
                throw MeshError("edge (" + std::to_string(edges[i].first) + ", " + std::to_string(edges[i].second) +
                                ") is shared by more than two triangles");
            }
            if (count == 1) {
                boundary_[static_cast<std::size_t>(edges[i].first)] = true;
                boundary_[static_cast<std::size_t>(edges[i].second)] = true;
            }
            i = j;
        }
        for (Index v = 0; v < static_cast<Index>(n); ++v) {
            rebuild_neighbors(v);
        }
    }

    int dim_ = 2;
    std::vector<Vec3> nodes_;
    std::vector<Tri> triangles_;
    std::vector<bool> boundary_;
    std::vector<std::vector<Index>> node_tris_;
    std::vector<std::vector<Index>> neighbors_;
};

struct MeshStats {
    double q_min = 0.0;
    double q_mean = 0.0;
    double min_angle_mean = 0.0;
    std::size_t inverted = 0;
};

/// Whole-mesh quality summary. 3D meshes have no global orientation test,
/// so `inverted` is only counted in 2D.
inline MeshStats mesh_stats(const TriMesh& mesh) {
    MeshStats s;
    if (mesh.triangle_count() == 0) return s;
    s.q_min = 1.0;
    for (const Tri& t : mesh.triangles()) {
        const Vec3& a = mesh.node(t[0]);
        const Vec3& b = mesh.node(t[1]);
        const Vec3& c = mesh.node(t[2]);
        const double q = shape_quality(a, b, c);
        s.q_min = std::min(s.q_min, q);
        s.q_mean += q;
        s.min_angle_mean += min_angle_deg(a, b, c);
        if (mesh.dim() == 2 && !(signed_area(a, b, c) > 0.0)) ++s.inverted;
    }
    s.q_mean /= static_cast<double>(mesh.triangle_count());
    s.min_angle_mean /= static_cast<double>(mesh.triangle_count());
    return s;
}

/// Per-element qualities binned into `bins` equal-width bins over [0, 1].
inline std::vector<std::size_t> quality_histogram(const TriMesh& mesh, int bins = 20) {
    std::vector<std::size_t> h(static_cast<std::size_t>(bins), 0);
    for (const Tri& t : mesh.triangles()) {
        const double q = shape_quality(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2]));
        int b = static_cast<int>(q * bins);
        b = std::clamp(b, 0, bins - 1);
        ++h[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace meshforge
