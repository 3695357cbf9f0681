#pragma once

#include "meshforge/mesh/patch.hpp"

#include <array>
#include <vector>

namespace meshforge {

/// Local height field z = a x^2 + b y^2 in a frame whose rows are the x, y
/// and normal axes, centered at `origin`.
struct Quadric {
    double a = 0.0;
    double b = 0.0;
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
    Vec3 origin = Vec3::Zero();
    /// Root-mean-square height residual of the fit.
    double residual = 0.0;

    Vec3 to_local(const Vec3& x) const { return frame * (x - origin); }
    Vec3 to_global(const Vec3& u) const { return origin + frame.transpose() * u; }
};

/// Area-weighted normal of the fan around `points[0]`.
inline Vec3 node_normal(const std::vector<Vec3>& points, const std::vector<std::array<int, 3>>& tris) {
    Vec3 n = Vec3::Zero();
    for (const auto& t : tris) {
        n += area_normal(points[static_cast<std::size_t>(t[0])], points[static_cast<std::size_t>(t[1])],
                         points[static_cast<std::size_t>(t[2])]);
    }
    const double len = n.norm();
    if (!(len > 1e-300)) throw MeshError("degenerate normal");
    return n / len;
}

inline Vec3 node_normal(const NodePatch& p) { return node_normal(p.coords, p.incident_tris); }

/// Least-squares fit in a given frame. The origin contributes (0, 0, 0)
/// exactly, so only the other points carry information.
inline Quadric fit_quadric_in_frame(const std::vector<Vec3>& points, const Vec3& origin,
                                    const Eigen::Matrix3d& frame) {
    Quadric q;
    q.frame = frame;
    q.origin = origin;
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    std::vector<Vec3> local;
    local.reserve(points.size());
    for (const Vec3& x : points) {
        const Vec3 u = q.to_local(x);
        local.push_back(u);
        const Eigen::Vector2d phi(u.x() * u.x(), u.y() * u.y());
        m += phi * phi.transpose();
        rhs += phi * u.z();
    }
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(m);
    if (m.norm() > 0.0 && lu.rank() == 2 && std::abs(m.determinant()) > 1e-14 * m.squaredNorm()) {
        const Eigen::Vector2d ab = lu.solve(rhs);
        q.a = ab.x();
        q.b = ab.y();
    }
    double ss = 0.0;
    for (const Vec3& u : local) {
        const double r = u.z() - (q.a * u.x() * u.x() + q.b * u.y() * u.y());
        ss += r * r;
    }
    q.residual = local.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(local.size()));
    return q;
}

/// Fit around `points[0]` with the frame normal set to the area-weighted
/// node normal and any orthonormal tangent completion.
inline Quadric fit_quadric(const std::vector<Vec3>& points, const std::vector<std::array<int, 3>>& tris) {
    const Vec3 n = node_normal(points, tris);
    return fit_quadric_in_frame(points, points.front(), tangent_frame(n));
}

/// Fit on the patch's normalized coordinates.
inline Quadric fit_quadric(const NodePatch& p) {
    return fit_quadric(p.coords, p.incident_tris);
}

/// Project along the frame normal onto the fitted height field (a parameter
/// domain projection, not the closest point).
inline Vec3 project_to_quadric(const Vec3& x, const Quadric& q) {
    const Vec3 u = q.to_local(x);
    return q.to_global(Vec3(u.x(), u.y(), q.a * u.x() * u.x() + q.b * u.y() * u.y()));
}

/// Surface-fitting reward: minus the distance to the projection.
inline double surface_reward(const Vec3& x, const Quadric& q) { return -(x - project_to_quadric(x, q)).norm(); }

}  // namespace meshforge
