#pragma once

#include "meshforge/mesh/geometry.hpp"
#include "meshforge/mesh/tri_mesh.hpp"

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace meshforge {

/// Maps mesh coordinates into the unit box: u = (R x - offset) / scale.
/// R is the identity for planar patches and the node's tangent frame for
/// surface patches.
struct NormTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 offset = Vec3::Zero();
    double scale = 1.0;

    Vec3 normalize(const Vec3& x) const { return (rotation * x - offset) / scale; }
    Vec3 denormalize(const Vec3& u) const { return rotation.transpose() * (u * scale + offset); }
    /// Displacements only rotate and scale.
    Vec3 denormalize_delta(const Vec3& du) const { return rotation.transpose() * (du * scale); }
};

/// One-ring environment of a free node. Local node 0 is the free node
/// (`center_index`); local nodes 1..N are the ring in counter-clockwise order
/// starting at the lowest global index.
struct NodePatch {
    int dim = 2;
    Index node = -1;
    int center_index = 0;
    std::vector<Index> global;
    std::vector<Vec3> coords;
    /// Unnormalized coordinates at extraction time.
    std::vector<Vec3> world;
    std::vector<std::array<int, 3>> incident_tris;
    /// Per incident triangle, the area normal before any move (3D validity).
    std::vector<Vec3> reference_normals;
    NormTransform transform;

    std::size_t ring_size() const { return coords.size() - 1; }
    std::size_t size() const { return coords.size(); }
    const Vec3& center() const { return coords[static_cast<std::size_t>(center_index)]; }
    void set_center(const Vec3& u) {
        coords[static_cast<std::size_t>(center_index)] = u;
        if (dim == 2) coords[static_cast<std::size_t>(center_index)].z() = 0.0;
    }
    Vec3 center_world() const { return transform.denormalize(center()); }

    /// Undirected local edges: the center to every ring node plus the ring
    /// cycle.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& t : incident_tris) {
            for (int k = 0; k < 3; ++k) {
                int a = t[static_cast<std::size_t>(k)];
                int b = t[static_cast<std::size_t>((k + 1) % 3)];
                if (a > b) std::swap(a, b);
                out.emplace_back(a, b);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    Eigen::MatrixXi adjacency() const {
        const auto n = static_cast<Eigen::Index>(coords.size());
        Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
        for (auto [i, j] : edges()) {
            a(i, j) = 1;
            a(j, i) = 1;
        }
        return a;
    }
};

/// Orthonormal frame with the given unit normal as its third row.
inline Eigen::Matrix3d tangent_frame(const Vec3& normal) {
    const Vec3 n = normal.normalized();
    Vec3 axis = Vec3::UnitX();
    if (std::abs(n.y()) < std::abs(n.x()) && std::abs(n.y()) <= std::abs(n.z())) {
        axis = Vec3::UnitY();
    } else if (std::abs(n.z()) < std::abs(n.x()) && std::abs(n.z()) < std::abs(n.y())) {
        axis = Vec3::UnitZ();
    }
    const Vec3 e1 = (axis - axis.dot(n) * n).normalized();
    const Vec3 e2 = n.cross(e1);
    Eigen::Matrix3d r;
    r.row(0) = e1.transpose();
    r.row(1) = e2.transpose();
    r.row(2) = n.transpose();
    return r;
}

/// Translate the bounding-box minimum to the origin and divide by the
/// largest extent so all coordinates fall in [0, 1].
inline NormTransform fit_unit_box(const std::vector<Vec3>& rotated, int dim, const Eigen::Matrix3d& rotation) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& x : rotated) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    if (dim == 2) {
        lo.z() = 0.0;
        hi.z() = 0.0;
    }
    const double extent = (hi - lo).maxCoeff();
    NormTransform tr;
    tr.rotation = rotation;
    tr.offset = lo;
    tr.scale = extent > 0.0 ? extent : 1.0;
    return tr;
}

struct PatchOptions {
    /// For surface meshes, express the patch in the node's tangent frame
    /// (z along the area-weighted normal) before normalizing.
    bool local_frame = true;
};

/// Assemble a patch from world coordinates; `tris` use local indices with
/// the free node at local index 0.
inline NodePatch assemble_patch(int dim, Index node, std::vector<Index> global, const std::vector<Vec3>& world,
                                std::vector<std::array<int, 3>> tris, const PatchOptions& opt = {}) {
    NodePatch p;
    p.dim = dim;
    p.node = node;
    p.center_index = 0;
    p.global = std::move(global);
    p.incident_tris = std::move(tris);
    p.world = world;

    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    if (dim == 3 && opt.local_frame) {
        Vec3 n = Vec3::Zero();
        for (const auto& t : p.incident_tris) {
            n += area_normal(world[static_cast<std::size_t>(t[0])], world[static_cast<std::size_t>(t[1])],
                             world[static_cast<std::size_t>(t[2])]);
        }
        if (n.norm() > 0.0) rot = tangent_frame(n);
    }
    std::vector<Vec3> rotated;
    rotated.reserve(world.size());
    for (const Vec3& x : world) rotated.push_back(rot * x);
    p.transform = fit_unit_box(rotated, dim, rot);
    p.coords.reserve(world.size());
    for (const Vec3& x : world) {
        Vec3 u = p.transform.normalize(x);
        if (dim == 2) u.z() = 0.0;
        p.coords.push_back(u);
    }
    if (dim == 3) {
        for (const auto& t : p.incident_tris) {
            p.reference_normals.push_back(area_normal(p.coords[static_cast<std::size_t>(t[0])],
                                                      p.coords[static_cast<std::size_t>(t[1])],
                                                      p.coords[static_cast<std::size_t>(t[2])]));
        }
    }
    return p;
}

/// Fan patch around `center` with ring nodes in counter-clockwise order.
inline NodePatch make_fan_patch(int dim, const Vec3& center, const std::vector<Vec3>& ring,
                                const PatchOptions& opt = {}) {
    std::vector<Vec3> world;
    world.push_back(center);
    world.insert(world.end(), ring.begin(), ring.end());
    std::vector<std::array<int, 3>> tris;
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
        tris.push_back({0, 1 + i, 1 + (i + 1) % n});
    }
    std::vector<Index> global(world.size());
    for (std::size_t i = 0; i < global.size(); ++i) global[i] = static_cast<Index>(i);
    return assemble_patch(dim, 0, std::move(global), world, std::move(tris), opt);
}

/// One-ring patch of an interior node, normalized into the unit box.
inline NodePatch extract_patch(const TriMesh& mesh, Index v, const PatchOptions& opt = {}) {
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.node_count()) {
        throw MeshError("node " + std::to_string(v) + " out of range");
    }
    if (mesh.neighbors(v).empty()) {
        throw MeshError("node " + std::to_string(v) + " is isolated");
    }
    if (mesh.is_boundary(v)) {
        throw MeshError("node " + std::to_string(v) + " is on the boundary and cannot be smoothed");
    }
    const std::vector<Index> ring = mesh.ring(v);
    std::vector<Index> global;
    global.reserve(ring.size() + 1);
    global.push_back(v);
    global.insert(global.end(), ring.begin(), ring.end());

    std::vector<Vec3> world;
    world.reserve(global.size());
    for (Index g : global) world.push_back(mesh.node(g));

    auto local_of = [&](Index g) {
        for (std::size_t i = 0; i < global.size(); ++i) {
            if (global[i] == g) return static_cast<int>(i);
        }
        throw MeshError("inconsistent ring for node " + std::to_string(v));
    };
    std::vector<std::array<int, 3>> tris;
    for (Index t : mesh.incident_triangles(v)) {
        const Tri& tri = mesh.triangle(t);
        const int k = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
        tris.push_back({0, local_of(tri[static_cast<std::size_t>((k + 1) % 3)]),
                        local_of(tri[static_cast<std::size_t>((k + 2) % 3)])});
    }
    return assemble_patch(mesh.dim(), v, std::move(global), world, std::move(tris), opt);
}

/// Write the patch's free node back into the mesh.
inline void write_back(TriMesh& mesh, const NodePatch& patch) { mesh.set_node(patch.node, patch.center_world()); }

/// Element quality of each incident triangle with the free node placed at
/// `center` (normalized coordinates).
template <typename F>
inline void for_each_incident_quality(const NodePatch& p, const Vec3& center, F&& f) {
    auto at = [&](int i) -> const Vec3& {
        return i == p.center_index ? center : p.coords[static_cast<std::size_t>(i)];
    };
    for (std::size_t k = 0; k < p.incident_tris.size(); ++k) {
        const auto& t = p.incident_tris[k];
        const Vec3& a = at(t[0]);
        const Vec3& b = at(t[1]);
        const Vec3& c = at(t[2]);
        f(p.dim == 2 ? quality_2d(a, b, c) : quality_3d(a, b, c, p.reference_normals[k]));
    }
}

inline std::vector<TriQuality> patch_qualities(const NodePatch& p) {
    std::vector<TriQuality> out;
    for_each_incident_quality(p, p.center(), [&](const TriQuality& q) { out.push_back(q); });
    return out;
}

/// Potential of a patch: the minimum incident q~. With the adaptive penalty
/// each invalid element contributes -q~ instead of q~.
inline double phi_at(const NodePatch& p, const Vec3& center, bool adaptive_penalty) {
    double m = std::numeric_limits<double>::infinity();
    for_each_incident_quality(p, center, [&](const TriQuality& q) {
        const double v = (adaptive_penalty && !q.valid) ? -q.q_tilde : q.q_tilde;
        m = std::min(m, v);
    });
    return m;
}

inline double phi(const NodePatch& p, bool adaptive_penalty) { return phi_at(p, p.center(), adaptive_penalty); }

inline bool all_valid_at(const NodePatch& p, const Vec3& center) {
    bool ok = true;
    for_each_incident_quality(p, center, [&](const TriQuality& q) { ok = ok && q.valid; });
    return ok;
}

inline bool all_valid(const NodePatch& p) { return all_valid_at(p, p.center()); }

/// Mean incident q~ with invalid elements counted negatively.
inline double mean_signed_quality_at(const NodePatch& p, const Vec3& center) {
    double s = 0.0;
    int n = 0;
    for_each_incident_quality(p, center, [&](const TriQuality& q) {
        s += q.valid ? q.q_tilde : -q.q_tilde;
        ++n;
    });
    return n > 0 ? s / n : 0.0;
}

}  // namespace meshforge
