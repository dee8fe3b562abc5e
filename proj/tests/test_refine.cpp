#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"
#include "aepnp/refine.hpp"
#include "aepnp/sim.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace aepnp;

namespace {

const CameraIntrinsics kCam{150.0, 150.0, 320.0, 240.0};

SyntheticScene scene_with(int n, double sigma, std::uint64_t seed) {
    SceneConfig cfg;
    cfg.n_points = n;
    cfg.noise_sigma_px = sigma;
    cfg.seed = seed;
    return generate_scene(cfg);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Vec2 residual_at(const ScaledPose &pose, const Correspondence &c) {
    Vec2 r;
    REQUIRE(detail::residual_and_jacobian(pose, c, kCam, r, nullptr));
    return r;
}

} // namespace

TEST_CASE("analytic Jacobian matches central finite differences") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> us(0.5, 2.0);
    const double h = 1e-6;
    for (int state = 0; state < 100; ++state) {
        ScaledPose pose;
        pose.rotation = Rotation(oracle::random_rotation_matrix(rng));
        pose.translation = Vec3(u(rng), u(rng), 6.0 + u(rng));
        pose.s1 = us(rng);
        pose.s2 = us(rng);
        const Vec3 x(u(rng), u(rng), u(rng));
        const auto c = make_correspondence(x, Vec2(320 + 100 * u(rng), 240 + 100 * u(rng)), kCam);

        Vec2 r;
        detail::Jacobian2x8 j;
        REQUIRE(detail::residual_and_jacobian(pose, c, kCam, r, &j));
        CHECK((r - residual_at(pose, c)).norm() == 0.0);
        CHECK((r - (project(pose, x, kCam) - c.pixel)).norm() < 1e-9);

        for (int k = 0; k < 8; ++k) {
            detail::Params8 d = detail::Params8::Zero();
            d(k) = h;
            const Vec2 fd = (residual_at(detail::apply_increment(pose, d), c) -
                             residual_at(detail::apply_increment(pose, -d), c)) /
                            (2 * h);
            CAPTURE(state);
            CAPTURE(k);
            CHECK((fd - j.col(k)).norm() <= 1e-4 * std::max(j.col(k).norm(), 1e-8));
        }
    }
}

TEST_CASE("starting at the truth on noise-free data") {
    const auto scene = scene_with(200, 0.0, 2);
    const auto res = refine(scene.truth, scene.corrs, kCam);
    CHECK(res.report.converged);
    CHECK(res.report.iterations <= 2);
    CHECK(res.report.final_cost < 1e-16);
}

TEST_CASE("recovers the truth from a 2 degree, 5 percent perturbation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto scene = scene_with(300, 0.0, 100 + seed);
        Vec3 axis(u(rng), u(rng), u(rng));
        axis.normalize();
        ScaledPose start = scene.truth;
        start.rotation = Rotation(scene.truth.rotation.matrix() * oracle::exp_map(axis * oracle::rad(2.0)));
        start.s1 *= 1.05;
        start.s2 *= 0.95;
        const auto res = refine(start, scene.corrs, kCam);
        CAPTURE(seed);
        CHECK(res.report.converged);
        CHECK(rotation_error(res.pose.rotation, scene.truth.rotation) < 1e-8);
        CHECK(translation_error(res.pose.translation, scene.truth.translation) < 1e-8);
        CHECK(scale_error(res.pose.s1, scene.truth.s1) < 1e-8);
        CHECK(scale_error(res.pose.s2, scene.truth.s2) < 1e-8);
    }
}

TEST_CASE("refining the linear solution at 2 px noise lowers cost and errors") {
    std::vector<double> lin_r, ref_r, lin_s, ref_s, lin_t, ref_t;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto scene = scene_with(1000, 2.0, 200 + seed);
        const auto lin = aepnp_solve(scene.corrs, kCam).pose;
        const auto res = refine(lin, scene.corrs, kCam);
        CHECK(res.report.final_cost < res.report.initial_cost);
        lin_r.push_back(rotation_error(lin.rotation, scene.truth.rotation));
        ref_r.push_back(rotation_error(res.pose.rotation, scene.truth.rotation));
        lin_t.push_back(translation_error(lin.translation, scene.truth.translation));
        ref_t.push_back(translation_error(res.pose.translation, scene.truth.translation));
        lin_s.push_back(scale_error(lin.s1, scene.truth.s1) + scale_error(lin.s2, scene.truth.s2));
        ref_s.push_back(scale_error(res.pose.s1, scene.truth.s1) + scale_error(res.pose.s2, scene.truth.s2));
    }
    CHECK(median(ref_r) <= median(lin_r));
    CHECK(median(ref_t) <= median(lin_t));
    CHECK(median(ref_s) <= median(lin_s));
}

TEST_CASE("cost is non-increasing in the iteration budget") {
    const auto scene = scene_with(200, 1.0, 4);
    ScaledPose start = scene.truth;
    start.rotation = Rotation(scene.truth.rotation.matrix() * Rotation::about_x(0.1).matrix());
    start.s1 *= 1.3;
    start.translation.z() += 0.5;
    double previous = std::numeric_limits<double>::infinity();
    for (int budget = 1; budget <= 12; ++budget) {
        RefineConfig cfg;
        cfg.max_iterations = budget;
        const auto res = refine(start, scene.corrs, kCam, cfg);
        CHECK(res.report.final_cost <= res.report.initial_cost);
        CHECK(res.report.final_cost <= previous);
        CHECK(res.report.iterations <= budget);
        previous = res.report.final_cost;
    }
}

TEST_CASE("scales stay positive and the x gauge is untouched") {
    ScaledPose pose;
    pose.s1 = 0.5;
    pose.s2 = 2.0;
    detail::Params8 d = detail::Params8::Zero();
    d(6) = -40.0;
    d(7) = -700.0;
    const auto out = detail::apply_increment(pose, d);
    CHECK(out.s1 > 0.0);
    CHECK(out.s2 >= 0.0);

    const auto scene = scene_with(100, 1.0, 5);
    ScaledPose start = scene.truth;
    start.s1 = 0.05;
    start.s2 = 20.0;
    const auto res = refine(start, scene.corrs, kCam);
    CHECK(res.pose.s1 > 0.0);
    CHECK(res.pose.s2 > 0.0);
    CHECK(res.pose.linear().col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refine error contract") {
    const auto scene = scene_with(3, 0.0, 6);
    CHECK_THROWS_AS(refine(scene.truth, scene.corrs, kCam), Error);
    try {
        refine(scene.truth, scene.corrs, kCam);
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::InsufficientResiduals);
    }

    // Points behind the camera do not count towards the active set.
    const auto many = scene_with(50, 0.0, 7);
    ScaledPose behind = many.truth;
    behind.translation.z() = -50.0;
    CHECK_THROWS_AS(refine(behind, many.corrs, kCam), Error);
}
