#include "meshforge/data/surfaces.hpp"
#include "meshforge/mesh/patch.hpp"
#include "meshforge/surface/quadric.hpp"

#include <gtest/gtest.h>

using namespace meshforge;

TEST(Surfaces, SphereWithoutJitterIsExact) {
    const TriMesh m = analytic_surface_mesh(SurfaceKind::Sphere, 8, 0.0, 1);
    EXPECT_LE(surface_drift(SurfaceKind::Sphere, m), 1e-9);
    EXPECT_TRUE(m.interior_nodes().size() == m.node_count());
    EXPECT_EQ(m.node_count(), 6u * 64 + 2);
}

TEST(Surfaces, ClosedSurfacesHaveManifoldRings) {
    for (SurfaceKind k : {SurfaceKind::Sphere, SurfaceKind::Torus}) {
        const TriMesh m = analytic_surface_mesh(k, 10, 0.2, 3);
        EXPECT_LE(surface_drift(k, m), 1e-9);
        for (Index v : m.interior_nodes()) EXPECT_EQ(m.ring(v).size(), m.degree(v));
        // V - E + F: 2 for the sphere, 0 for the torus
        std::size_t e2 = 0;
        for (Index v = 0; v < static_cast<Index>(m.node_count()); ++v) e2 += m.degree(v);
        const long chi = static_cast<long>(m.node_count()) - static_cast<long>(e2 / 2) + static_cast<long>(m.triangle_count());
        EXPECT_EQ(chi, k == SurfaceKind::Sphere ? 2 : 0);
    }
}

TEST(Surfaces, OutwardOrientation) {
    const TriMesh m = analytic_surface_mesh(SurfaceKind::Sphere, 8, 0.0, 1);
    for (const Tri& t : m.triangles()) {
        const Vec3 c = (m.node(t[0]) + m.node(t[1]) + m.node(t[2])) / 3.0;
        EXPECT_GT(area_normal(m.node(t[0]), m.node(t[1]), m.node(t[2])).dot(c), 0.0);
    }
}

TEST(Surfaces, JitterLowersQuality) {
    const double q0 = mesh_stats(analytic_surface_mesh(SurfaceKind::Sphere, 16, 0.0, 2)).q_mean;
    const double q1 = mesh_stats(analytic_surface_mesh(SurfaceKind::Sphere, 16, 0.3, 2)).q_mean;
    EXPECT_LT(q1, q0);
    EXPECT_LT(q1, 0.7);
}

TEST(Surfaces, SaddleFitRecoversCurvature) {
    // z = x^2 - y^2; at the origin the tangent plane is z = 0 with axes x, y
    const TriMesh m = analytic_surface_mesh(SurfaceKind::Saddle, 40, 0.0, 1);
    const Index center = 20 * 41 + 20;
    ASSERT_LT(m.node(center).norm(), 1e-12);
    const NodePatch p = extract_patch(m, center, {.local_frame = false});
    const Quadric q = fit_quadric_in_frame(p.world, p.world[0], Eigen::Matrix3d::Identity());
    EXPECT_NEAR(q.a, 1.0, 0.05);
    EXPECT_NEAR(q.b, -1.0, 0.05);
}
