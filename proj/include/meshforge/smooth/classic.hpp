#pragma once

#include "meshforge/mesh/patch.hpp"
#include "meshforge/mesh/tri_mesh.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace meshforge {

/// Centroid of the ring, in mesh coordinates. No validity check.
inline Vec3 laplacian(const NodePatch& p) {
    Vec3 s = Vec3::Zero();
    for (std::size_t i = 1; i < p.world.size(); ++i) s += p.world[i];
    return s / static_cast<double>(p.world.size() - 1);
}

/// Laplacian move accepted only when every incident element stays valid and
/// the minimum incident quality does not drop.
inline Vec3 smart_laplacian(const NodePatch& p) {
    const Vec3 target = p.transform.normalize(laplacian(p));
    Vec3 u = target;
    if (p.dim == 2) u.z() = 0.0;
    if (all_valid_at(p, u) && phi_at(p, u, false) >= phi(p, false)) return laplacian(p);
    return p.world[0];
}

/// Zhou-Shimada angle-based smoothing. For every ring node, the vector to the
/// free node is rotated onto the bisector of the ring angle there; the new
/// position is the mean of these candidates. Works in the patch's
/// normalized frame (the tangent plane for surface patches, keeping height).
inline Vec3 angle_based(const NodePatch& p) {
    const std::size_t n = p.ring_size();
    const Vec3& c = p.center();
    Vec2 acc = Vec2::Zero();
    for (std::size_t j = 1; j <= n; ++j) {
        const Vec3& xj = p.coords[j];
        const Vec3& prev = p.coords[j == 1 ? n : j - 1];
        const Vec3& next = p.coords[j == n ? 1 : j + 1];
        const Vec2 en = (next - xj).head<2>();
        const Vec2 ep = (prev - xj).head<2>();
        // interior angle runs counter-clockwise from the next edge to the previous one
        double theta = std::atan2(en.x() * ep.y() - en.y() * ep.x(), en.dot(ep));
        if (theta < 0.0) theta += 2.0 * std::numbers::pi;
        const double base = std::atan2(en.y(), en.x()) + 0.5 * theta;
        const double r = (c - xj).head<2>().norm();
        acc += xj.head<2>() + r * Vec2(std::cos(base), std::sin(base));
    }
    acc /= static_cast<double>(n);
    const Vec3 u(acc.x(), acc.y(), p.dim == 2 ? 0.0 : c.z());
    if (!all_valid_at(p, u)) return p.world[0];
    return p.transform.denormalize(u);
}

/// Regularizing element transform for one triangle.
///
/// Each vertex is pulled a sixth of the way towards the apex of the
/// equilateral triangle erected inwards on its opposite edge. The map is
/// circulant and linear: it fixes translations and the similarity class of
/// the equilateral triangle with the input's orientation and halves the
/// opposite-orientation component, so the shape moves towards equilateral.
/// The result is then rescaled about the centroid to the input area.
/// Degenerate input is returned unchanged.
inline std::array<Vec2, 3> getme_element_transform(const std::array<Vec2, 3>& z) {
    constexpr double rho = 1.0 / 6.0;
    const double area = signed_area(z[0], z[1], z[2]);
    if (area == 0.0) return z;
    // apex on the side of the opposite vertex, for either orientation
    const double side = area > 0.0 ? 1.0 : -1.0;
    std::array<Vec2, 3> out;
    for (int k = 0; k < 3; ++k) {
        const Vec2& a = z[static_cast<std::size_t>((k + 1) % 3)];
        const Vec2& b = z[static_cast<std::size_t>((k + 2) % 3)];
        const Vec2 d = b - a;
        const Vec2 apex = 0.5 * (a + b) + side * (std::sqrt(3.0) / 2.0) * Vec2(-d.y(), d.x());
        out[static_cast<std::size_t>(k)] = (1.0 - rho) * z[static_cast<std::size_t>(k)] + rho * apex;
    }
    const Vec2 c = (z[0] + z[1] + z[2]) / 3.0;
    const Vec2 c2 = (out[0] + out[1] + out[2]) / 3.0;
    const double area2 = signed_area(out[0], out[1], out[2]);
    if (area2 == 0.0) return z;
    const double s = std::sqrt(std::abs(area / area2));
    for (auto& x : out) x = c + s * (x - c2);
    return out;
}

/// Element transform in the plane of a 3D triangle.
inline std::array<Vec3, 3> getme_element_transform(const std::array<Vec3, 3>& x) {
    const Vec3 nrm = (x[1] - x[0]).cross(x[2] - x[0]);
    if (nrm.norm() == 0.0) return x;
    const Vec3 e1 = (x[1] - x[0]).normalized();
    const Vec3 e2 = nrm.normalized().cross(e1);
    std::array<Vec2, 3> z;
    for (int k = 0; k < 3; ++k) {
        const Vec3 d = x[static_cast<std::size_t>(k)] - x[0];
        z[static_cast<std::size_t>(k)] = Vec2(d.dot(e1), d.dot(e2));
    }
    const auto t = getme_element_transform(z);
    std::array<Vec3, 3> out;
    for (int k = 0; k < 3; ++k) {
        out[static_cast<std::size_t>(k)] = x[0] + t[static_cast<std::size_t>(k)].x() * e1 + t[static_cast<std::size_t>(k)].y() * e2;
    }
    return out;
}

/// Mesh-level GETMe smoothing. Every iteration transforms all elements at
/// once and averages the proposals per free node. A node move is kept only
/// if its incident elements stay valid and none falls below the mesh
/// minimum quality at the start of the iteration, so the minimum never
/// decreases.
inline void getme_smooth(TriMesh& mesh, int iterations) {
    const std::size_t n = mesh.node_count();
    std::vector<Vec3> sum(n);
    std::vector<int> count(n);
    for (int it = 0; it < iterations; ++it) {
        const double q_floor = mesh_stats(mesh).q_min;
        std::fill(sum.begin(), sum.end(), Vec3::Zero());
        std::fill(count.begin(), count.end(), 0);
        for (const Tri& t : mesh.triangles()) {
            std::array<Vec3, 3> x{mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2])};
            const auto y = getme_element_transform(x);
            for (int k = 0; k < 3; ++k) {
                sum[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] += y[static_cast<std::size_t>(k)];
                ++count[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
            }
        }
        for (Index v = 0; v < static_cast<Index>(n); ++v) {
            const auto vi = static_cast<std::size_t>(v);
            if (mesh.is_boundary(v) || count[vi] == 0) continue;
            const Vec3 old = mesh.node(v);
            Vec3 target = sum[vi] / count[vi];
            if (mesh.dim() == 2) target.z() = 0.0;
            std::vector<Vec3> ref;
            for (Index t : mesh.incident_triangles(v)) {
                const Tri& tri = mesh.triangle(t);
                ref.push_back(area_normal(mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])));
            }
            mesh.set_node(v, target);
            bool ok = true;
            std::size_t k = 0;
            for (Index t : mesh.incident_triangles(v)) {
                const Tri& tri = mesh.triangle(t);
                const Vec3& a = mesh.node(tri[0]);
                const Vec3& b = mesh.node(tri[1]);
                const Vec3& c = mesh.node(tri[2]);
                const TriQuality q = mesh.dim() == 2 ? quality_2d(a, b, c) : quality_3d(a, b, c, ref[k]);
                ++k;
                if (!q.valid || q.q_tilde < q_floor) {
                    ok = false;
                    break;
                }
            }
            if (!ok) mesh.set_node(v, old);
        }
    }
}

struct PatternSearchOptions {
    std::array<double, 3> scales{0.1, 0.01, 0.001};
    int iterations_per_scale = 40;
    int directions = 16;
};

/// Maximize the adaptive-penalty potential over the free node position by
/// multi-scale compass search in normalized coordinates. Never returns a
/// position worse than the start.
inline Vec3 opt_smooth(const NodePatch& p, const PatternSearchOptions& opt = {}) {
    // Surface patches are searched in the tangent plane only.
    std::vector<Vec3> dirs;
    for (int k = 0; k < opt.directions; ++k) {
        const double a = 2.0 * std::numbers::pi * k / opt.directions;
        dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
    Vec3 x = p.center();
    double fx = phi_at(p, x, true);
    for (double scale : opt.scales) {
        double step = scale;
        for (int it = 0; it < opt.iterations_per_scale; ++it) {
            Vec3 best = x;
            double fbest = fx;
            for (const Vec3& d : dirs) {
                const Vec3 y = x + step * d;
                const double fy = phi_at(p, y, true);
                if (fy > fbest) {
                    fbest = fy;
                    best = y;
                }
            }
            if (fbest > fx) {
                x = best;
                fx = fbest;
            } else {
                step *= 0.5;
            }
        }
    }
    return p.transform.denormalize(x);
}

}  // namespace meshforge
