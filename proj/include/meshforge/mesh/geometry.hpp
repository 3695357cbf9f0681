#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace meshforge {

using Index = std::int32_t;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Tri = std::array<Index, 3>;

/// Quality of one triangle. `q_tilde` is the inverse aspect ratio 2r/R
/// (1 for equilateral, 0 for degenerate); `valid` is the orientation test.
struct TriQuality {
    double q_tilde = 0.0;
    bool valid = false;
};

/// Signed area of the triangle projected on the xy-plane; positive when
/// counter-clockwise.
inline double signed_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

/// Area-scaled normal: cross(b - a, c - a) / 2.
inline Vec3 area_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a);
}

/// Inverse aspect ratio 2r/R = 8 A^2 / (s * la * lb * lc), independent of
/// orientation. Degenerate triangles score 0.
inline double shape_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    const double area = area_normal(a, b, c).norm();
    const double s = 0.5 * (la + lb + lc);
    const double denom = s * la * lb * lc;
    if (!(area > 0.0) || !(denom > 0.0)) {
        return 0.0;
    }
    return std::clamp(8.0 * area * area / denom, 0.0, 1.0);
}

inline TriQuality quality_2d(const Vec3& a, const Vec3& b, const Vec3& c) {
    return {shape_quality(a, b, c), signed_area(a, b, c) > 0.0};
}

inline TriQuality quality_2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return quality_2d(Vec3(a.x(), a.y(), 0.0), Vec3(b.x(), b.y(), 0.0), Vec3(c.x(), c.y(), 0.0));
}

/// 3D elements are valid while their normal agrees with a reference normal
/// captured before the move.
inline TriQuality quality_3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& reference_normal) {
    return {shape_quality(a, b, c), area_normal(a, b, c).dot(reference_normal) > 0.0};
}

/// Smallest interior angle in degrees; 0 for degenerate triangles.
inline double min_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    if (!(la > 0.0 && lb > 0.0 && lc > 0.0) || !(area_normal(a, b, c).norm() > 0.0)) {
        return 0.0;
    }
    auto angle = [](double opposite, double s1, double s2) {
        const double cosv = std::clamp((s1 * s1 + s2 * s2 - opposite * opposite) / (2.0 * s1 * s2), -1.0, 1.0);
        return std::acos(cosv);
    };
    const double m = std::min({angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)});
    return m * 180.0 / std::numbers::pi;
}

inline double min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
    return min_angle_deg(Vec3(a.x(), a.y(), 0.0), Vec3(b.x(), b.y(), 0.0), Vec3(c.x(), c.y(), 0.0));
}

}  // namespace meshforge
