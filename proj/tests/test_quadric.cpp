#include "meshforge/surface/quadric.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace meshforge;

namespace {

std::vector<std::array<int, 3>> fan(int n) {
    std::vector<std::array<int, 3>> t;
    for (int i = 0; i < n; ++i) t.push_back({0, 1 + i, 1 + (i + 1) % n});
    return t;
}

}  // namespace

TEST(NodeNormal, FlatFan) {
    std::vector<Vec3> pts{Vec3::Zero()};
    for (const Vec3& x : mftest::regular_ring(6)) pts.push_back(x);
    const Vec3 n = node_normal(pts, fan(6));
    EXPECT_LT((n - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(NodeNormal, PyramidApex) {
    std::vector<Vec3> pts{Vec3(0, 0, 1)};
    for (const Vec3& x : mftest::regular_ring(5)) pts.push_back(x);
    const Vec3 n = node_normal(pts, fan(5));
    EXPECT_LT((n - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(NodeNormal, AreaWeighting) {
    // area 1 with normal +z, area 3 with normal +x
    std::vector<Vec3> pts{Vec3::Zero(), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(0, 3, 0), Vec3(0, 0, 2)};
    const Vec3 n = node_normal(pts, {{0, 1, 2}, {0, 3, 4}});
    EXPECT_LT((n - Vec3(3, 0, 1).normalized()).norm(), 1e-12);
    EXPECT_THROW(node_normal(pts, {{0, 1, 1}}), MeshError);
}

TEST(NodeNormal, RigidMotionCovariance) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> pts{Vec3(0, 0, 0.2)};
    for (const Vec3& x : mftest::regular_ring(7)) pts.push_back(x + Vec3(0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)));
    const Vec3 n = node_normal(pts, fan(7));
    for (int i = 0; i < 20; ++i) {
        const Eigen::Matrix3d R = Eigen::AngleAxisd(3 * u(rng), Vec3(u(rng), u(rng), u(rng)).normalized()).toRotationMatrix();
        const Vec3 t(u(rng), u(rng), u(rng));
        std::vector<Vec3> moved;
        for (const Vec3& x : pts) moved.push_back(R * x + t);
        EXPECT_LT((node_normal(moved, fan(7)) - R * n).norm(), 1e-9);
    }
}

TEST(Quadric, ExactRecovery) {
    std::vector<Vec3> pts{Vec3::Zero()};
    for (const Vec3& x : mftest::regular_ring(8, 0.3)) pts.emplace_back(x.x(), x.y(), 2 * x.x() * x.x() + 3 * x.y() * x.y());
    const Quadric q = fit_quadric_in_frame(pts, Vec3::Zero(), Eigen::Matrix3d::Identity());
    EXPECT_NEAR(q.a, 2.0, 1e-9);
    EXPECT_NEAR(q.b, 3.0, 1e-9);
    EXPECT_LE(q.residual, 1e-9);
}

TEST(Quadric, CoplanarRingGivesPlane) {
    std::vector<Vec3> pts{Vec3::Zero()};
    for (const Vec3& x : mftest::regular_ring(6)) pts.push_back(x);
    const Quadric q = fit_quadric(pts, fan(6));
    EXPECT_NEAR(q.a, 0.0, 1e-12);
    EXPECT_NEAR(q.b, 0.0, 1e-12);
}

TEST(Quadric, RankDeficientFallsBackToPlane) {
    // all ring points on the frame's x axis: the y^2 column vanishes
    std::vector<Vec3> pts{Vec3::Zero(), Vec3(1, 0, 1), Vec3(-1, 0, 1)};
    const Quadric q = fit_quadric_in_frame(pts, Vec3::Zero(), Eigen::Matrix3d::Identity());
    EXPECT_EQ(q.a, 0.0);
    EXPECT_EQ(q.b, 0.0);
}

TEST(Quadric, SphereCap) {
    // cap of the unit sphere around the north pole: z = sqrt(1 - r^2) - 1 ~ -r^2/2
    const double r = 0.1;
    std::vector<Vec3> pts{Vec3(0, 0, 1)};
    for (int k = 0; k < 6; ++k) {
        const double a = 2 * M_PI * k / 6;
        pts.push_back(Vec3(r * std::cos(a), r * std::sin(a), std::sqrt(1 - r * r)));
    }
    const Quadric q = fit_quadric(pts, fan(6));
    EXPECT_NEAR(q.a, -0.5, 0.02);
    EXPECT_NEAR(q.b, -0.5, 0.02);
}

TEST(Quadric, ProjectionExamples) {
    Quadric q;
    q.a = 2;
    q.b = 3;
    const Vec3 p = project_to_quadric(Vec3(0.1, 0.2, 0.5), q);
    EXPECT_NEAR((p - Vec3(0.1, 0.2, 0.14)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((project_to_quadric(p, q) - p).norm(), 0.0, 1e-15);
    EXPECT_EQ(surface_reward(p, q), 0.0);
    Quadric flat;
    EXPECT_EQ(project_to_quadric(Vec3(0.3, -0.4, 0.7), flat), Vec3(0.3, -0.4, 0));
    EXPECT_NEAR(surface_reward(Vec3(0.2, 0.2, 0.1), flat), -0.1, 1e-15);
}

TEST(Quadric, ProjectionIsIdempotentInRotatedFrames) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        Quadric q;
        q.a = u(rng);
        q.b = u(rng);
        q.frame = Eigen::AngleAxisd(3 * u(rng), Vec3(u(rng), u(rng), u(rng)).normalized()).toRotationMatrix();
        q.origin = Vec3(u(rng), u(rng), u(rng));
        const Vec3 x(u(rng), u(rng), u(rng));
        const Vec3 p = project_to_quadric(x, q);
        EXPECT_LT((project_to_quadric(p, q) - p).norm(), 1e-12);
    }
}
