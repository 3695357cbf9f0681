#pragma once

#include "meshforge/mesh/tri_mesh.hpp"

#include <cmath>
#include <vector>

namespace mftest {
using namespace meshforge;

// Unit square split along (0,0)-(1,1).
inline TriMesh unit_square() {
    return TriMesh(2, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

// Equilateral lattice of (nx+1) x (ny+1) nodes with unit spacing; rows are
// shifted by half a cell so every interior node has six neighbors.
inline TriMesh hex_lattice(int nx, int ny) {
    std::vector<Vec3> nodes;
    const double h = std::sqrt(3.0) / 2.0;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            nodes.emplace_back(i + 0.5 * (j % 2), j * h, 0.0);
        }
    }
    auto id = [&](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
    std::vector<Tri> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (j % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            }
        }
    }
    return TriMesh(2, std::move(nodes), std::move(tris));
}

// Structured grid of right triangles on [0,1]^2 with n x n cells.
inline TriMesh grid_mesh(int n) {
    std::vector<Vec3> nodes;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) nodes.emplace_back(double(i) / n, double(j) / n, 0.0);
    }
    auto id = [&](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
    std::vector<Tri> tris;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(2, std::move(nodes), std::move(tris));
}

// Regular n-gon of radius r around c, counter-clockwise from angle a0.
inline std::vector<Vec3> regular_ring(int n, double r = 1.0, Vec3 c = Vec3::Zero(), double a0 = 0.0) {
    std::vector<Vec3> out;
    for (int k = 0; k < n; ++k) {
        const double a = a0 + 2.0 * M_PI * k / n;
        out.push_back(c + r * Vec3(std::cos(a), std::sin(a), 0.0));
    }
    return out;
}

// Oracle for 2r/R from side lengths only: r = A/s, R = abc/(4A).
inline double oracle_quality(const Vec3& p, const Vec3& q, const Vec3& w) {
    const double a = (q - w).norm(), b = (w - p).norm(), c = (p - q).norm();
    const double s = 0.5 * (a + b + c);
    const double heron = std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
    if (heron == 0.0) return 0.0;
    const double r = heron / s;
    const double R = a * b * c / (4.0 * heron);
    return 2.0 * r / R;
}

}  // namespace mftest
