#pragma once

#include "meshforge/mesh/tri_mesh.hpp"
#include "meshforge/util/random.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace meshforge {

namespace detail {

inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

// Positive when d lies strictly inside the circumcircle of the
// counter-clockwise triangle abc.
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace detail

/// Incremental Bowyer-Watson triangulation of a point set, bootstrapped
/// from an enclosing super-triangle. The cavity of each new point grows
/// from the triangle containing it across edges whose far triangle has the
/// point strictly inside its circumcircle; points exactly on a circumcircle
/// keep the existing triangle, which breaks cocircular ties by insertion
/// order. Returns counter-clockwise triangles over the input indices.
inline std::vector<Tri> delaunay_triangulate(const std::vector<Vec2>& input) {
    struct T {
        std::array<int, 3> v;
        std::array<int, 3> nb;  // nb[k] lies across the edge opposite v[k]
        bool alive;
    };
    const int n = static_cast<int>(input.size());
    if (n < 3) throw MeshError("Delaunay triangulation needs at least 3 points");

    Vec2 lo = input[0], hi = input[0];
    for (const Vec2& p : input) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec2 mid = 0.5 * (lo + hi);
    const double span = std::max((hi - lo).maxCoeff(), 1e-12);
    std::vector<Vec2> pts = input;
    pts.emplace_back(mid.x() - 40.0 * span, mid.y() - 20.0 * span);
    pts.emplace_back(mid.x() + 40.0 * span, mid.y() - 20.0 * span);
    pts.emplace_back(mid.x(), mid.y() + 40.0 * span);

    std::vector<T> tris;
    tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

    std::vector<int> cavity, stack;
    std::vector<char> in_cavity;
    struct Edge {
        int a, b, outside;
    };
    std::vector<Edge> rim;
    std::unordered_map<int, int> new_from;

    auto contains = [&](const T& t, const Vec2& p) {
        return detail::orient2d(pts[t.v[0]], pts[t.v[1]], p) >= 0.0 &&
               detail::orient2d(pts[t.v[1]], pts[t.v[2]], p) >= 0.0 &&
               detail::orient2d(pts[t.v[2]], pts[t.v[0]], p) >= 0.0;
    };

    int last = 0;
    for (int pi = 0; pi < n; ++pi) {
        const Vec2& p = pts[pi];
        // walk from the last created triangle, falling back to a scan
        int seed = -1;
        {
            int cur = last;
            for (std::size_t steps = 0; steps < tris.size() && cur >= 0 && tris[cur].alive; ++steps) {
                const T& t = tris[cur];
                int next = -2;
                for (int k = 0; k < 3; ++k) {
                    if (detail::orient2d(pts[t.v[(k + 1) % 3]], pts[t.v[(k + 2) % 3]], p) < 0.0) {
                        next = t.nb[k];
                        break;
                    }
                }
                if (next == -2) {
                    seed = cur;
                    break;
                }
                cur = next;
            }
        }
        if (seed < 0) {
            for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
                if (tris[t].alive && contains(tris[t], p)) {
                    seed = t;
                    break;
                }
            }
        }
        if (seed < 0) throw MeshError("Delaunay: point " + std::to_string(pi) + " outside the super-triangle");

        in_cavity.resize(tris.size(), 0);
        cavity.clear();
        rim.clear();
        stack.assign(1, seed);
        in_cavity[seed] = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                const int a = tris[t].v[(k + 1) % 3];
                const int b = tris[t].v[(k + 2) % 3];
                const int o = tris[t].nb[k];
                if (o >= 0 && in_cavity[o]) continue;
                const bool grow = o >= 0 &&
                                  detail::incircle(pts[tris[o].v[0]], pts[tris[o].v[1]], pts[tris[o].v[2]], p) > 0.0;
                if (grow) {
                    in_cavity[o] = 1;
                    stack.push_back(o);
                } else {
                    rim.push_back({a, b, o});
                }
            }
        }
        // Edges popped before their neighbor joined the cavity are interior.
        std::erase_if(rim, [&](const Edge& e) { return e.outside >= 0 && in_cavity[e.outside]; });
        for (const Edge& e : rim) {
            if (!(detail::orient2d(pts[e.a], pts[e.b], p) > 0.0)) {
                throw MeshError("Delaunay: degenerate cavity while inserting point " + std::to_string(pi));
            }
        }
        for (int t : cavity) {
            tris[t].alive = false;
            in_cavity[t] = 0;
        }

        new_from.clear();
        const int base = static_cast<int>(tris.size());
        for (std::size_t i = 0; i < rim.size(); ++i) {
            const Edge& e = rim[i];
            const int id = base + static_cast<int>(i);
            // triangle (a, b, p): across p is the outside triangle
            tris.push_back({{e.a, e.b, pi}, {-1, -1, e.outside}, true});
            new_from[e.a] = id;
            if (e.outside >= 0) {
                T& o = tris[e.outside];
                for (int k = 0; k < 3; ++k) {
                    if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nb[k] = id;
                }
            }
        }
        for (std::size_t i = 0; i < rim.size(); ++i) {
            T& t = tris[static_cast<std::size_t>(base) + i];
            // edge (b, p) is opposite a and continues with the triangle starting at b
            t.nb[0] = new_from.at(t.v[1]);
            // edge (p, a) is opposite b; its neighbor is the triangle ending at a
            for (std::size_t j = 0; j < rim.size(); ++j) {
                if (rim[j].b == t.v[0]) t.nb[1] = base + static_cast<int>(j);
            }
        }
        in_cavity.resize(tris.size(), 0);
        last = base;
    }

    std::vector<Tri> out;
    for (const T& t : tris) {
        if (!t.alive || t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
}

struct DelaunayOptions {
    /// Boundary segments per side of the square; 0 picks round(sqrt(n)).
    int boundary_segments = 0;
    /// Interior points keep this fraction of the nominal spacing away from
    /// the boundary.
    double margin_factor = 0.25;
};

/// Random Delaunay mesh of the unit square: corners pinned, evenly spaced
/// boundary nodes, and `n_interior` uniform interior points.
inline TriMesh delaunay_mesh(int n_interior, std::uint64_t seed, const DelaunayOptions& opt = {}) {
    if (n_interior < 0) throw MeshError("negative point count");
    const int segs = opt.boundary_segments > 0
                         ? opt.boundary_segments
                         : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_interior)))));
    std::vector<Vec2> pts{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    for (int i = 1; i < segs; ++i) {
        const double t = static_cast<double>(i) / segs;
        pts.emplace_back(t, 0.0);
        pts.emplace_back(1.0, t);
        pts.emplace_back(1.0 - t, 1.0);
        pts.emplace_back(0.0, 1.0 - t);
    }
    const double h = 1.0 / std::sqrt(static_cast<double>(std::max(n_interior, 1)));
    const double m = std::min(opt.margin_factor * h, 0.25);
    Rng rng(seed);
    for (int i = 0; i < n_interior; ++i) {
        const double x = uniform(rng, m, 1.0 - m);
        const double y = uniform(rng, m, 1.0 - m);
        pts.emplace_back(x, y);
    }
    auto tris = delaunay_triangulate(pts);
    std::vector<Vec3> nodes;
    nodes.reserve(pts.size());
    for (const Vec2& p : pts) nodes.emplace_back(p.x(), p.y(), 0.0);
    TriMesh mesh(2, std::move(nodes), std::move(tris));
    // every boundary node must lie on the square
    for (Index v = 0; v < static_cast<Index>(mesh.node_count()); ++v) {
        if (!mesh.is_boundary(v)) continue;
        const Vec3& x = mesh.node(v);
        if (x.x() != 0.0 && x.x() != 1.0 && x.y() != 0.0 && x.y() != 1.0) {
            throw MeshError("Delaunay: interior point ended up on the hull");
        }
    }
    return mesh;
}

}  // namespace meshforge
