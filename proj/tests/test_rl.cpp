#include "meshforge/data/delaunay.hpp"
#include "meshforge/data/surfaces.hpp"
#include "meshforge/rl/flip_env.hpp"
#include "meshforge/rl/rollout.hpp"
#include "meshforge/rl/smooth_env.hpp"
#include "meshforge/smooth/classic.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace mftest;
using namespace meshforge::rl;

namespace {

// Unit-square ring with the free node at (x, y); ring nodes are boundary.
TriMesh square_fan(double x, double y) {
    return TriMesh(2, {{x, y, 0}, {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}});
}

std::shared_ptr<const std::vector<TriMesh>> dataset(std::vector<TriMesh> m) {
    return std::make_shared<const std::vector<TriMesh>>(std::move(m));
}

SmoothEnvConfig env_config(RewardVariant v) {
    SmoothEnvConfig c;
    c.reward.variant = v;
    return c;
}

// Upper 1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi2_critical_99(double k) {
    const double z = 2.3263478740408408;
    const double h = 2.0 / (9.0 * k);
    return k * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
}

}  // namespace

TEST(Reward, NoOpUnderAdvancementIsGammaMinusOneTimesPhi) {
    const auto data = dataset({square_fan(0.3, 0.3)});
    for (auto v : {RewardVariant::Advancement, RewardVariant::AdvancementPlusAdaptive}) {
        SmoothEnv env(data, env_config(v));
        auto s = env.start((*data)[0], 0);
        const double p = phi(s.patch, false);
        const auto r = env.step(s, Vec3::Zero());
        EXPECT_EQ(r.reward, (0.99 - 1.0) * p);
        EXPECT_LT(r.reward, 0.0);
    }
}

TEST(Reward, NoOpAtHalfQualityCostsHalfPercent) {
    const NodePatch p = extract_patch(square_fan(0.3, 0.3), 0);
    // any patch with phi = 0.5 gives (0.99 - 1) * 0.5
    const double phi_s = 0.5;
    EXPECT_NEAR(0.99 * phi_s - phi_s, -0.005, 1e-15);
    const double r = smooth_reward({RewardVariant::Advancement, 0.99}, p, p.center(), p.center());
    EXPECT_NEAR(r, -0.01 * phi(p, false), 1e-15);
}

TEST(Reward, MovingToTheOptimumIsRewarded) {
    const auto data = dataset({square_fan(0.3, 0.3)});
    SmoothEnv env(data, env_config(RewardVariant::Advancement));
    auto s = env.start((*data)[0], 0);
    // grid optimum of the square ring is its center
    const Vec3 target = s.patch.transform.normalize(Vec3(0.5, 0.5, 0));
    const auto r = env.step(s, target - s.patch.center());
    EXPECT_GT(r.reward, 0.0);
    EXPECT_FALSE(r.done);
}

TEST(Reward, InvertingMoveUnderAdaptivePenalty) {
    const auto data = dataset({square_fan(0.5, 0.5)});
    SmoothEnv env(data, env_config(RewardVariant::AdaptivePenalty));
    auto s = env.start((*data)[0], 0);
    const double before = phi(s.patch, true);
    const auto r = env.step(s, Vec3(0.25, 0.25, 0.0));  // (0.75, 0.75) keeps validity
    EXPECT_FALSE(r.done);
    const auto r2 = env.step(s, Vec3(0.25, 0.25, 0.0));  // (1.0, 1.0) sits on a ring node
    EXPECT_TRUE(r2.done);
    auto s3 = env.start(square_fan(0.9, 0.9), 0);
    const double b3 = phi(s3.patch, true);
    const auto r3 = env.step(s3, Vec3(0.25, 0.25, 0.0));  // past the corner: inverted
    EXPECT_TRUE(r3.done);
    EXPECT_LT(r3.reward, -b3);
    EXPECT_GT(before, 0.0);
    EXPECT_GT(r.reward, -before);
}

TEST(Reward, ActionsAreClamped) {
    const auto data = dataset({square_fan(0.5, 0.5)});
    SmoothEnv env(data, env_config(RewardVariant::Advancement));
    auto s = env.start((*data)[0], 0);
    const Vec3 c0 = s.patch.center();
    env.step(s, Vec3(3.0, -3.0, 0.0));
    EXPECT_NEAR(s.patch.center().x() - c0.x(), 0.25, 1e-15);
    EXPECT_NEAR(s.patch.center().y() - c0.y(), -0.25, 1e-15);
}

TEST(Reward, AdvancementReturnTelescopes) {
    const auto data = dataset({delaunay_mesh(60, 3), delaunay_mesh(60, 4)});
    Rng rng(11);
    for (auto v : {RewardVariant::Advancement, RewardVariant::AdvancementPlusAdaptive}) {
        SmoothEnvConfig cfg = env_config(v);
        cfg.max_steps = 5;
        SmoothEnv env(data, cfg);
        for (int k = 0; k < 1000; ++k) {
            auto s = env.reset(rng);
            const double phi0 = env.potential(s);
            double ret = 0.0, disc = 1.0;
            int t = 0;
            for (bool done = false; !done; ++t) {
                const auto r = env.step(s, Vec3(uniform(rng, -0.25, 0.25), uniform(rng, -0.25, 0.25), 0.0));
                ret += disc * r.reward;
                disc *= cfg.reward.gamma;
                done = r.done;
            }
            EXPECT_NEAR(ret, std::pow(cfg.reward.gamma, t) * env.potential(s) - phi0, 1e-10);
        }
    }
}

TEST(Reward, GmsnetStyleAndOriginalPayPhiEachStep) {
    const auto data = dataset({square_fan(0.3, 0.3)});
    for (auto v : {RewardVariant::Original, RewardVariant::GmsnetStyle}) {
        SmoothEnv env(data, env_config(v));
        auto s = env.start((*data)[0], 0);
        const auto r = env.step(s, Vec3(0.1, 0.0, 0.0));
        EXPECT_DOUBLE_EQ(r.reward, phi(s.patch, false));
        auto s2 = env.start(square_fan(0.9, 0.9), 0);
        EXPECT_EQ(env.step(s2, Vec3(0.25, 0.25, 0)).reward, -1.0);
    }
}

TEST(Reward, VariantNamesRoundTrip) {
    for (auto v : all_reward_variants) EXPECT_EQ(reward_variant_from_string(to_string(v)), v);
    EXPECT_EQ(reward_variant_from_string("adv+adaptive"), RewardVariant::AdvancementPlusAdaptive);
    EXPECT_THROW(reward_variant_from_string("best"), std::invalid_argument);
}

TEST(ActionMask, Examples) {
    const auto m6 = build_action_mask(6);
    for (int i = 0; i < action_slots; ++i) EXPECT_EQ(m6[i], i < 7 ? 1.0 : 0.0);
    for (double x : build_action_mask(14)) EXPECT_EQ(x, 1.0);
    const auto m1 = build_action_mask(1);
    EXPECT_EQ(m1[0], 1.0);
    EXPECT_EQ(m1[1], 1.0);
    for (int i = 2; i < action_slots; ++i) EXPECT_EQ(m1[i], 0.0);
    EXPECT_THROW(build_action_mask(15), std::out_of_range);
    EXPECT_THROW(build_action_mask(0), std::out_of_range);
}

TEST(ActionMask, NeverAdmitsSlotsBeyondRing) {
    for (int n = 1; n <= max_ring; ++n) {
        const auto m = build_action_mask(n);
        for (int i = n + 1; i < action_slots; ++i) EXPECT_EQ(m[i], 0.0);
    }
}

TEST(SmoothEnv, SingleMeshResetsStayInIt) {
    const auto data = dataset({delaunay_mesh(30, 5)});
    SmoothEnv env(data, {});
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        const auto s = env.reset(rng);
        EXPECT_EQ(s.mesh, 0u);
        EXPECT_FALSE((*data)[0].is_boundary(s.patch.node));
        EXPECT_EQ(s.t, 0);
    }
}

TEST(SmoothEnv, FixedSeedGivesSameResets) {
    const auto data = dataset({delaunay_mesh(30, 5), delaunay_mesh(40, 6)});
    SmoothEnv env(data, {});
    Rng a(9), b(9);
    for (int k = 0; k < 100; ++k) {
        const auto s = env.reset(a), t = env.reset(b);
        EXPECT_EQ(s.mesh, t.mesh);
        EXPECT_EQ(s.patch.node, t.patch.node);
    }
}

TEST(SmoothEnv, ResetIsUniformOverUnionOfInteriorNodes) {
    std::vector<TriMesh> meshes;
    // meshes of different sizes: uniform-over-union differs from mesh-then-node
    for (int k = 0; k < 20; ++k) meshes.push_back(delaunay_mesh(20 + 3 * k, derive_seed(21, k)));
    const auto data = dataset(std::move(meshes));
    SmoothEnv env(data, {});
    std::map<std::pair<std::size_t, Index>, long> counts;
    Rng rng(77);
    const long n = 100000;
    for (long k = 0; k < n; ++k) {
        const auto s = env.reset(rng);
        ++counts[{s.mesh, s.patch.node}];
    }
    const double cells = static_cast<double>(env.node_count());
    EXPECT_EQ(counts.size(), env.node_count());
    const double expected = static_cast<double>(n) / cells;
    double chi2 = 0.0;
    for (const auto& [key, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, chi2_critical_99(cells - 1));
}

TEST(SmoothEnv, PhiPrevTracksPatch) {
    const auto data = dataset({delaunay_mesh(50, 8)});
    SmoothEnv env(data, {});
    Rng rng(3);
    auto s = env.reset(rng);
    EXPECT_NEAR(s.phi_prev, phi(s.patch, true), 1e-12);
    env.step(s, Vec3(0.05, -0.02, 0.0));
    EXPECT_NEAR(s.phi_prev, phi(s.patch, true), 1e-12);
}

TEST(SmoothEnv, EpisodesNeverTouchTheMeshes) {
    const auto data = dataset({delaunay_mesh(50, 8)});
    const TriMesh copy = (*data)[0];
    SmoothEnv env(data, {});
    Rng rng(4);
    for (int k = 0; k < 100; ++k) {
        auto s = env.reset(rng);
        env.step(s, Vec3(0.2, 0.2, 0));
    }
    for (std::size_t v = 0; v < copy.node_count(); ++v) EXPECT_EQ(copy.node(Index(v)), (*data)[0].node(Index(v)));
}

TEST(SmoothEnv, EpisodeEndsAfterTwoSteps) {
    const auto data = dataset({square_fan(0.5, 0.5)});
    SmoothEnv env(data, {});
    auto s = env.start((*data)[0], 0);
    EXPECT_FALSE(env.step(s, Vec3(0.01, 0, 0)).done);
    EXPECT_TRUE(env.step(s, Vec3(-0.01, 0, 0)).done);
    EXPECT_EQ(s.t, 2);
}

TEST(SmoothEnv, RejectsEmptyDatasets) {
    EXPECT_THROW(SmoothEnv(dataset({}), {}), std::invalid_argument);
    EXPECT_THROW(SmoothEnv(dataset({unit_square()}), {}), std::invalid_argument);
}

namespace {

// Flat hexagonal fan in the z = 0 plane of 3D space.
TriMesh flat_fan_3d() {
    std::vector<Vec3> nodes{Vec3::Zero()};
    for (const auto& x : regular_ring(6)) nodes.push_back(x);
    std::vector<Tri> tris;
    for (Index k = 0; k < 6; ++k) tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    return TriMesh(3, std::move(nodes), std::move(tris));
}

}  // namespace

TEST(SurfaceReward, OnSurfaceMoveCostsNothing) {
    const auto data = dataset({flat_fan_3d()});
    SmoothEnv env(data, env_config(RewardVariant::Advancement));
    auto s = env.start((*data)[0], 0);
    const auto r = env.step(s, Vec3(0.05, -0.03, 0.0));
    EXPECT_NEAR(r.surface_term, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.reward, r.quality_reward);
}

TEST(SurfaceReward, NormalMoveOnPlaneCostsItsLength) {
    const auto data = dataset({flat_fan_3d()});
    SmoothEnv env(data, env_config(RewardVariant::Advancement));
    auto s = env.start((*data)[0], 0);
    EXPECT_NEAR(s.quadric.a, 0.0, 1e-12);
    EXPECT_NEAR(s.quadric.b, 0.0, 1e-12);
    const auto r = env.step(s, Vec3(0.0, 0.0, 0.1));
    EXPECT_NEAR(r.surface_term, -0.1, 1e-12);
    // the quality term only sees the tangent-plane copy
    EXPECT_NEAR(r.quality_reward, (0.99 - 1.0) * phi(s.flat, false), 1e-12);
}

TEST(SurfaceReward, DisabledTermIsZero) {
    SmoothEnvConfig cfg;
    cfg.surface_reward = false;
    const auto data = dataset({flat_fan_3d()});
    SmoothEnv env(data, cfg);
    auto s = env.start((*data)[0], 0);
    EXPECT_EQ(env.step(s, Vec3(0, 0, 0.1)).surface_term, 0.0);
}

namespace {

// Distance from u to z = a x^2 + b y^2 by grid search refined around the
// best sample.
double nearest_on_quadric(const Vec3& u, double a, double b) {
    double cx = u.x(), cy = u.y(), half = 0.2, best = std::numeric_limits<double>::infinity();
    for (int level = 0; level < 6; ++level) {
        const int n = 80;
        double bx = cx, by = cy;
        for (int i = -n; i <= n; ++i) {
            for (int j = -n; j <= n; ++j) {
                const double x = cx + half * i / n, y = cy + half * j / n;
                const double d = (Vec3(x, y, a * x * x + b * y * y) - u).norm();
                if (d < best) {
                    best = d;
                    bx = x;
                    by = y;
                }
            }
        }
        cx = bx;
        cy = by;
        half *= 4.0 / n;
    }
    return best;
}

}  // namespace

TEST(SurfaceReward, SphereMovesTrackTrueDistance) {
    const auto data = dataset({analytic_surface_mesh(SurfaceKind::Sphere, 8, 0.0, 1)});
    SmoothEnv env(data, env_config(RewardVariant::Advancement));
    Rng rng(5);
    int checked = 0;
    for (int k = 0; k < 40; ++k) {
        auto s = env.reset(rng);
        double diam = 0.0;
        for (const auto& x : s.patch.coords) {
            for (const auto& y : s.patch.coords) diam = std::max(diam, (x - y).norm());
        }
        Vec3 d(normal(rng), normal(rng), normal(rng));
        d *= uniform(rng, 0.01, 0.05) * diam / d.norm();
        const Vec3 moved = s.patch.center() + d;
        const auto r = env.step(s, d);
        const double truth = nearest_on_quadric(s.quadric.to_local(moved), s.quadric.a, s.quadric.b);
        if (truth < 1e-3 * diam) continue;  // relative error meaningless on the surface
        EXPECT_NEAR(-r.surface_term, truth, 0.1 * truth);
        ++checked;
    }
    EXPECT_GT(checked, 30);
}

TEST(FlipEnv, RewardsAreFromTheFixedSet) {
    const auto data = dataset({delaunay_mesh(150, 12), delaunay_mesh(150, 13)});
    FlipEnv env(data, {});
    Rng rng(6);
    std::map<double, int> seen;
    for (int k = 0; k < 300; ++k) {
        auto s = env.reset(rng);
        for (bool done = false; !done;) {
            const int slot = static_cast<int>(uniform_index(rng, s.patch.ring_size() + 1));
            const auto r = env.step(s, slot);
            EXPECT_TRUE(r.reward == 1.0 || r.reward == -0.1 || r.reward == -1.0) << r.reward;
            ++seen[r.reward];
            done = r.done;
        }
    }
    EXPECT_EQ(seen.size(), 3u);
}

TEST(FlipEnv, NoOpCostsATenth) {
    const auto data = dataset({delaunay_mesh(150, 12)});
    FlipEnv env(data, {});
    Rng rng(7);
    auto s = env.reset(rng);
    const auto tris = s.mesh->triangles();
    const auto r = env.step(s, 0);
    EXPECT_EQ(r.reward, -0.1);
    EXPECT_FALSE(r.flipped);
    EXPECT_EQ(s.mesh->triangles(), tris);
}

TEST(FlipEnv, NonConvexQuadIsRejectedWithoutMutation) {
    // kite with node 3 pushed inside: the diagonal 1-3 cannot flip
    TriMesh m(2, {{0, 0, 0}, {2, 0, 0}, {1, 3, 0}, {1, 0.5, 0}}, {{0, 1, 3}, {1, 2, 3}});
    const auto before = m.triangles();
    const auto r = apply_flip_action(m, 1, {3}, 1);
    EXPECT_EQ(r.reward, -1.0);
    EXPECT_FALSE(r.flipped);
    EXPECT_EQ(m.triangles(), before);
}

TEST(FlipEnv, FlipRemovingASliverIsRewarded) {
    // flat rhombus split along its long diagonal 0-2: two slivers (q ~ 0.076);
    // the short diagonal gives q ~ 0.63
    TriMesh m(2, {{0, 0, 0}, {1, -0.2, 0}, {2, 0, 0}, {1, 0.2, 0}}, {{0, 1, 2}, {0, 2, 3}});
    const auto r = apply_flip_action(m, 0, {1, 2, 3}, 2);
    EXPECT_EQ(r.reward, 1.0);
    EXPECT_TRUE(r.flipped);
    EXPECT_TRUE(m.edge_triangles(0, 2).empty());
    EXPECT_EQ(m.edge_triangles(1, 3).size(), 2u);
    // flipping back lowers the pair quality again
    const auto back = apply_flip_action(m, 1, {3}, 1);
    EXPECT_EQ(back.reward, -1.0);
}

TEST(FlipEnv, KeepsCenterAndStopsOnBadFlip) {
    const auto data = dataset({delaunay_mesh(200, 14)});
    const TriMesh original = (*data)[0];
    FlipEnv env(data, {});
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        auto s = env.reset(rng);
        const Index c = s.center;
        EXPECT_GE(s.patch.ring_size(), 7u);
        const auto r = env.step(s, 1);
        EXPECT_EQ(s.patch.node, c);
        if (r.reward == -1.0) {
            EXPECT_TRUE(r.done);
        }
    }
    EXPECT_EQ(original.triangles(), (*data)[0].triangles());
}

TEST(EpisodeLength, GmsnetReturnGrowsLinearlyUnderSmallRandomMoves) {
    const auto data = dataset({delaunay_mesh(300, 31), delaunay_mesh(300, 32)});
    std::vector<double> ts, rs;
    for (int T : {2, 4, 8, 16, 32}) {
        SmoothEnvConfig cfg = env_config(RewardVariant::GmsnetStyle);
        cfg.max_steps = T;
        SmoothEnv env(data, cfg);
        Rng rng(5);
        Rng moves(6);
        const auto policy = [&](const SmoothEnvState&) {
            return Vec3(uniform(moves, -0.01, 0.01), uniform(moves, -0.01, 0.01), 0.0);
        };
        ts.push_back(T);
        rs.push_back(mean_episode_return(env, policy, 400, rng));
    }
    const auto fit = fit_line(ts, rs);
    EXPECT_GT(fit.r2, 0.99);
    EXPECT_GT(fit.slope, 0.0);
}

TEST(EpisodeLength, LineFitIsExactOnALine) {
    const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_THROW(fit_line({1}, {1}), std::invalid_argument);
}
