#pragma once

#include "meshforge/mesh/tri_mesh.hpp"
#include "meshforge/util/random.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace meshforge {

enum class SurfaceKind { Sphere, Torus, Saddle };

inline SurfaceKind surface_kind_from_string(const std::string& s) {
    if (s == "sphere") return SurfaceKind::Sphere;
    if (s == "torus") return SurfaceKind::Torus;
    if (s == "saddle") return SurfaceKind::Saddle;
    throw std::invalid_argument("unknown surface kind '" + s + "'");
}

inline std::string to_string(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Sphere: return "sphere";
        case SurfaceKind::Torus: return "torus";
        case SurfaceKind::Saddle: return "saddle";
    }
    return "?";
}

inline constexpr double torus_major = 1.0;
inline constexpr double torus_minor = 0.4;

namespace detail {

// Unit sphere from a subdivided cube. Each face is a res x res grid.
inline TriMesh cube_sphere(int res) {
    std::map<std::tuple<int, int, int>, Index> ids;
    std::vector<Vec3> nodes;
    std::vector<Tri> tris;
    auto node_at = [&](int i, int j, int k) {
        auto key = std::make_tuple(i, j, k);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        const Vec3 x(2.0 * i / res - 1.0, 2.0 * j / res - 1.0, 2.0 * k / res - 1.0);
        const auto id = static_cast<Index>(nodes.size());
        nodes.push_back(x.normalized());
        ids.emplace(key, id);
        return id;
    };
    // (fixed axis, value, u axis, v axis) with u x v pointing outwards
    struct Face {
        int axis, value, ua, va;
    };
    const Face faces[6] = {{0, res, 1, 2}, {0, 0, 2, 1}, {1, res, 2, 0}, {1, 0, 0, 2}, {2, res, 0, 1}, {2, 0, 1, 0}};
    for (const Face& f : faces) {
        auto at = [&](int a, int b) {
            int c[3];
            c[f.axis] = f.value;
            c[f.ua] = a;
            c[f.va] = b;
            return node_at(c[0], c[1], c[2]);
        };
        for (int a = 0; a < res; ++a) {
            for (int b = 0; b < res; ++b) {
                const Index p00 = at(a, b), p10 = at(a + 1, b), p11 = at(a + 1, b + 1), p01 = at(a, b + 1);
                // alternate diagonals to keep node degrees balanced
                if ((a + b) % 2 == 0) {
                    tris.push_back({p00, p10, p11});
                    tris.push_back({p00, p11, p01});
                } else {
                    tris.push_back({p00, p10, p01});
                    tris.push_back({p10, p11, p01});
                }
            }
        }
    }
    return TriMesh(3, std::move(nodes), std::move(tris));
}

inline Vec3 torus_point(double u, double v) {
    return {(torus_major + torus_minor * std::cos(v)) * std::cos(u),
            (torus_major + torus_minor * std::cos(v)) * std::sin(u), torus_minor * std::sin(v)};
}

}  // namespace detail

/// Triangulated analytic surface. `jitter` moves nodes tangentially by up to
/// that fraction of the local edge length (uniform per tangent component);
/// sphere and torus nodes stay exactly on the surface, saddle nodes keep
/// z = x^2 - y^2 and the saddle boundary is fixed.
inline TriMesh analytic_surface_mesh(SurfaceKind kind, int resolution, double jitter, std::uint64_t seed) {
    if (resolution < 8) throw std::invalid_argument("surface resolution must be at least 8");
    Rng rng(seed);
    auto u01 = [](Rng& r) { return uniform(r, -1.0, 1.0); };
    switch (kind) {
        case SurfaceKind::Sphere: {
            TriMesh m = detail::cube_sphere(resolution);
            const double h = 2.0 / resolution;
            for (Index v = 0; v < static_cast<Index>(m.node_count()); ++v) {
                const Vec3 n = m.node(v);
                const Vec3 t1 = n.unitOrthogonal();
                const Vec3 t2 = n.cross(t1);
                const double a = u01(rng) * jitter * h;
                const double b = u01(rng) * jitter * h;
                m.set_node(v, (n + a * t1 + b * t2).normalized());
            }
            return m;
        }
        case SurfaceKind::Torus: {
            const int nu = 2 * resolution, nv = resolution;
            std::vector<Vec3> nodes;
            std::vector<Tri> tris;
            const double du = 2.0 * std::numbers::pi / nu, dv = 2.0 * std::numbers::pi / nv;
            for (int i = 0; i < nu; ++i) {
                for (int j = 0; j < nv; ++j) {
                    const double ju = u01(rng) * jitter * du;
                    const double jv = u01(rng) * jitter * dv;
                    nodes.push_back(detail::torus_point(i * du + ju, j * dv + jv));
                }
            }
            auto id = [&](int i, int j) { return static_cast<Index>(((i + nu) % nu) * nv + (j + nv) % nv); };
            for (int i = 0; i < nu; ++i) {
                for (int j = 0; j < nv; ++j) {
                    const Index p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
                    if ((i + j) % 2 == 0) {
                        tris.push_back({p00, p10, p11});
                        tris.push_back({p00, p11, p01});
                    } else {
                        tris.push_back({p00, p10, p01});
                        tris.push_back({p10, p11, p01});
                    }
                }
            }
            return TriMesh(3, std::move(nodes), std::move(tris));
        }
        case SurfaceKind::Saddle: {
            const int n = resolution;
            const double h = 2.0 / n;
            std::vector<Vec3> nodes;
            std::vector<Tri> tris;
            for (int j = 0; j <= n; ++j) {
                for (int i = 0; i <= n; ++i) {
                    double x = -1.0 + i * h, y = -1.0 + j * h;
                    const double jx = u01(rng) * jitter * h;
                    const double jy = u01(rng) * jitter * h;
                    if (i > 0 && i < n && j > 0 && j < n) {
                        x += jx;
                        y += jy;
                    }
                    nodes.emplace_back(x, y, x * x - y * y);
                }
            }
            auto id = [&](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    const Index p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
                    if ((i + j) % 2 == 0) {
                        tris.push_back({p00, p10, p11});
                        tris.push_back({p00, p11, p01});
                    } else {
                        tris.push_back({p00, p10, p01});
                        tris.push_back({p10, p11, p01});
                    }
                }
            }
            return TriMesh(3, std::move(nodes), std::move(tris));
        }
    }
    throw std::invalid_argument("unknown surface kind");
}

/// Largest distance of any node from the analytic surface.
inline double surface_drift(SurfaceKind kind, const TriMesh& mesh) {
    double d = 0.0;
    for (const Vec3& x : mesh.nodes()) {
        switch (kind) {
            case SurfaceKind::Sphere: d = std::max(d, std::abs(x.norm() - 1.0)); break;
            case SurfaceKind::Torus: {
                const double rho = std::hypot(x.x(), x.y()) - torus_major;
                d = std::max(d, std::abs(std::hypot(rho, x.z()) - torus_minor));
                break;
            }
            // vertical offset bounds the true distance from above
            case SurfaceKind::Saddle: d = std::max(d, std::abs(x.z() - (x.x() * x.x() - x.y() * x.y()))); break;
        }
    }
    return d;
}

}  // namespace meshforge
