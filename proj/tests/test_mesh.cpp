#include "meshforge/mesh/patch.hpp"
#include "meshforge/mesh/tri_mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace meshforge;
using mftest::hex_lattice;
using mftest::regular_ring;

TEST(TriMesh, RejectsBadInput) {
    EXPECT_THROW(TriMesh(2, {{0, 0, 0}, {1, 0, 0}}, {{0, 1, 2}}), MeshError);
    EXPECT_THROW(TriMesh(2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), MeshError);
    EXPECT_THROW(TriMesh(2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 2, 1}}), MeshError);
}

TEST(TriMesh, AdjacencyIsSymmetric) {
    const TriMesh m = hex_lattice(6, 6);
    for (Index v = 0; v < static_cast<Index>(m.node_count()); ++v) {
        for (Index w : m.neighbors(v)) {
            const auto nb = m.neighbors(w);
            EXPECT_NE(std::find(nb.begin(), nb.end(), v), nb.end());
        }
    }
}

TEST(TriMesh, BoundaryAndRing) {
    const TriMesh m = hex_lattice(4, 4);
    // node (2,2) is interior with six neighbors
    const Index v = 2 * 5 + 2;
    EXPECT_FALSE(m.is_boundary(v));
    EXPECT_EQ(m.degree(v), 6u);
    const auto ring = m.ring(v);
    ASSERT_EQ(ring.size(), 6u);
    EXPECT_EQ(ring.front(), m.neighbors(v).front());
    // counter-clockwise: consecutive ring nodes make positive triangles with v
    for (std::size_t i = 0; i < ring.size(); ++i) {
        EXPECT_GT(signed_area(m.node(v), m.node(ring[i]), m.node(ring[(i + 1) % ring.size()])), 0.0);
    }
    EXPECT_TRUE(m.is_boundary(0));
    EXPECT_THROW(m.ring(0), MeshError);
}

TEST(Patch, HexagonalNode) {
    const TriMesh m = hex_lattice(4, 4);
    const NodePatch p = extract_patch(m, 12);
    EXPECT_EQ(p.ring_size(), 6u);
    EXPECT_EQ(p.incident_tris.size(), 6u);
    for (const auto& t : p.incident_tris) {
        EXPECT_TRUE(t[0] == 0 || t[1] == 0 || t[2] == 0);
    }
    const auto adj = p.adjacency();
    EXPECT_EQ(adj, adj.transpose());
    EXPECT_EQ(adj.row(0).sum(), 6);
    EXPECT_NEAR(phi(p, false), 1.0, 1e-9);
}

TEST(Patch, RejectsBoundaryAndIsolated) {
    const TriMesh m = hex_lattice(3, 3);
    EXPECT_THROW(extract_patch(m, 0), MeshError);
    TriMesh iso(2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 0}}, {{0, 1, 2}});
    EXPECT_THROW(extract_patch(iso, 3), MeshError);
}

TEST(Patch, UnitSquareRingHasUnitScale) {
    const NodePatch p =
        make_fan_patch(2, Vec3(0.4, 0.4, 0), {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    EXPECT_DOUBLE_EQ(p.transform.scale, 1.0);
    for (const Vec3& u : p.coords) {
        EXPECT_GE(u.minCoeff(), 0.0);
        EXPECT_LE(u.maxCoeff(), 1.0);
    }
    EXPECT_EQ(p.center(), Vec3(0.4, 0.4, 0));
}

TEST(Patch, SmallPatchScalesActions) {
    auto ring = regular_ring(6, 0.01, Vec3(3, 4, 0));
    const NodePatch p = make_fan_patch(2, Vec3(3, 4, 0), ring);
    EXPECT_NEAR(p.transform.scale, 0.02, 1e-15);
    const Vec3 d = p.transform.denormalize_delta(Vec3(0.25, -0.1, 0));
    EXPECT_NEAR(d.x(), 0.25 * 0.02, 1e-15);
    EXPECT_NEAR(d.y(), -0.1 * 0.02, 1e-15);
}

TEST(Patch, NormalizationRoundTrip) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 200; ++i) {
        const Vec3 c(u(rng), u(rng), u(rng));
        std::vector<Vec3> ring;
        for (int k = 0; k < 6; ++k) ring.push_back(c + Vec3(u(rng), u(rng), u(rng)) * 0.01);
        for (int dim : {2, 3}) {
            const NodePatch p = make_fan_patch(dim, c, ring);
            for (std::size_t k = 0; k < p.world.size(); ++k) {
                Vec3 x = p.world[k];
                if (dim == 2) x.z() = 0.0;
                const Vec3 back = p.transform.denormalize(p.transform.normalize(x));
                EXPECT_LT((back - x).norm(), 1e-12 * std::max(1.0, x.norm()));
                if (dim == 2) {
                    EXPECT_GE(p.coords[k].minCoeff(), -1e-15);
                    EXPECT_LE(p.coords[k].maxCoeff(), 1.0 + 1e-15);
                }
            }
        }
    }
}

TEST(Patch, ExtractThenWriteBackLeavesMeshUnchanged) {
    TriMesh m = hex_lattice(5, 5);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (Index v : m.interior_nodes()) m.set_node(v, m.node(v) + Vec3(u(rng), u(rng), 0));
    const auto before = m.nodes();
    const auto tris = m.triangles();
    for (Index v : m.interior_nodes()) write_back(m, extract_patch(m, v));
    EXPECT_EQ(m.triangles(), tris);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LT((m.nodes()[i] - before[i]).norm(), 1e-12);
}

TEST(Patch, SurfacePatchUsesTangentFrame) {
    // tilted flat fan: in the local frame all heights coincide
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    std::vector<Vec3> ring;
    for (const Vec3& x : regular_ring(6)) ring.push_back(R * x);
    const NodePatch p = make_fan_patch(3, Vec3::Zero(), ring);
    for (const Vec3& u : p.coords) EXPECT_NEAR(u.z(), 0.0, 1e-12);
    EXPECT_NEAR(phi(p, false), 1.0, 1e-9);
    EXPECT_TRUE(all_valid(p));
}

TEST(Phi, PlainAndAdaptive) {
    // square ring; moving the center outside inverts one element
    NodePatch p = make_fan_patch(2, Vec3(0.5, 0.5, 0), {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    EXPECT_NEAR(phi(p, false), 2.0 * std::sqrt(2.0) - 2.0, 1e-12);
    EXPECT_EQ(phi(p, false), phi(p, true));
    p.set_center(Vec3(0.5, -0.3, 0));
    // (0.5,-0.3) lies below the bottom edge: only triangle (c, r0, r1) flips
    const auto qs = patch_qualities(p);
    ASSERT_FALSE(qs[0].valid);
    for (std::size_t k = 1; k < qs.size(); ++k) EXPECT_TRUE(qs[k].valid);
    EXPECT_DOUBLE_EQ(phi(p, true), -qs[0].q_tilde);
    EXPECT_LE(phi(p, true), phi(p, false));
}

TEST(Phi, AdaptiveNeverExceedsPlain) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 500; ++i) {
        NodePatch p = make_fan_patch(2, Vec3(0.5, 0.5, 0), regular_ring(6, 0.5, Vec3(0.5, 0.5, 0)));
        p.set_center(Vec3(u(rng), u(rng), 0));
        if (all_valid(p)) {
            EXPECT_EQ(phi(p, true), phi(p, false));
        } else {
            EXPECT_LE(phi(p, true), phi(p, false));
            EXPECT_LT(phi(p, true), 0.0);
        }
    }
}

TEST(Stats, HistogramSumsToElementCount) {
    const TriMesh m = mftest::grid_mesh(6);
    const auto h = quality_histogram(m);
    std::size_t s = 0;
    for (auto c : h) s += c;
    EXPECT_EQ(s, m.triangle_count());
    const auto st = mesh_stats(m);
    EXPECT_NEAR(st.q_min, 2.0 * std::sqrt(2.0) - 2.0, 1e-12);
    EXPECT_NEAR(st.min_angle_mean, 45.0, 1e-9);
}
