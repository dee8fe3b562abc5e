#include "aepnp/sim.hpp"

#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

namespace aepnp {
namespace {

constexpr int kPlacementAttempts = 1000;
constexpr double kNoiseClip = 5.0;

bool fits_image(const ScaledPose &pose, std::span<const Vec3> points, const SceneConfig &cfg) {
    const CameraIntrinsics &k = cfg.intrinsics;
    for (const auto &x : points) {
        const Vec3 pc = pose.to_camera(x);
        if (!(pc.z() > 0.0))
            return false;
        const double u = k.fx * pc.x() / pc.z() + k.cx;
        const double v = k.fy * pc.y() / pc.z() + k.cy;
        if (u < 0.0 || u >= cfg.image_width || v < 0.0 || v >= cfg.image_height)
            return false;
    }
    return true;
}

struct TrialOutcome {
    std::optional<TrialErrors> errors;
};

// Scenes depend only on (base seed, trial index) so every parameter value and
// method sees the same draws.
SceneConfig trial_config(const SceneConfig &base, int trial) {
    SceneConfig cfg = base;
    auto rng = make_rng(base.seed, static_cast<std::uint64_t>(trial));
    cfg.seed = rng();
    return cfg;
}

template <typename Fn> void parallel_for(int count, unsigned threads, Fn &&fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = static_cast<int>(t); i < count; i += static_cast<int>(threads))
                fn(i);
        });
}

// Runs `trials` scenes built from `cfg` through every method and appends one record per method.
void run_point(SweepRecords &out, const std::string &name, double value, std::span<const Method> methods,
               int trials, const SceneConfig &cfg, const HarnessOptions &opts, unsigned threads) {
    if (trials < 1)
        throw Error(ErrorCode::ValidationError, "trials must be at least 1");
    std::vector<std::vector<TrialOutcome>> results(methods.size(), std::vector<TrialOutcome>(trials));
    parallel_for(trials, threads, [&](int trial) {
        const SceneConfig scene_cfg = trial_config(cfg, trial);
        std::optional<SyntheticScene> scene;
        try {
            scene = generate_scene(scene_cfg);
        } catch (const Error &) {
            return;
        }
        HarnessOptions trial_opts = opts;
        trial_opts.ransac.seed = scene_cfg.seed;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            try {
                results[m][trial].errors = run_method(methods[m], *scene, trial_opts);
            } catch (const Error &) {
            }
        }
    });
    for (std::size_t m = 0; m < methods.size(); ++m) {
        std::vector<TrialErrors> ok;
        for (const auto &r : results[m])
            if (r.errors)
                ok.push_back(*r.errors);
        out.push_back(summarize(name, value, methods[m], trials, ok));
    }
}

} // namespace

void SceneConfig::validate() const {
    if (n_points < 1)
        throw Error(ErrorCode::ValidationError, "n_points must be positive");
    if (!(noise_sigma_px >= 0.0) || !std::isfinite(noise_sigma_px))
        throw Error(ErrorCode::ValidationError, "noise sigma must be non-negative");
    if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0))
        throw Error(ErrorCode::ValidationError, "outlier ratio must lie in [0, 1)");
    if (!(scale_min > 0.0 && scale_max >= scale_min && std::isfinite(scale_max)))
        throw Error(ErrorCode::ValidationError, "scale range must be a positive interval");
    if (image_width <= 0 || image_height <= 0)
        throw Error(ErrorCode::ValidationError, "image size must be positive");
    if (!intrinsics.valid())
        throw Error(ErrorCode::ValidationError, "focal lengths must be positive");
}

Rotation random_rotation(std::mt19937_64 &rng) {
    std::normal_distribution<double> normal;
    double w = 0, x = 0, y = 0, z = 0;
    do {
        w = normal(rng);
        x = normal(rng);
        y = normal(rng);
        z = normal(rng);
    } while (w * w + x * x + y * y + z * z < 1e-12);
    return Rotation::from_quaternion(w, x, y, z);
}

SyntheticScene generate_scene(const SceneConfig &cfg) {
    cfg.validate();
    auto rng = make_rng(cfg.seed, 0);
    std::uniform_real_distribution<double> cube(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(cfg.scale_min, cfg.scale_max);

    const auto n = static_cast<std::size_t>(cfg.n_points);
    std::vector<Vec3> points(n);
    for (auto &p : points) {
        const double x = cube(rng);
        const double y = cube(rng);
        const double z = cube(rng);
        p = Vec3(x, y, z);
    }

    SyntheticScene scene;
    scene.intrinsics = cfg.intrinsics;
    scene.truth.s1 = scale(rng);
    scene.truth.s2 = scale(rng);
    scene.truth.rotation = random_rotation(rng);

    std::uniform_real_distribution<double> depth(4.0, 8.0);
    std::uniform_real_distribution<double> lateral(-0.25, 0.25);
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
        const double d = depth(rng);
        const double ox = lateral(rng) * d;
        const double oy = lateral(rng) * d;
        scene.truth.translation = Vec3(ox, oy, d);
        placed = fits_image(scene.truth, points, cfg);
    }
    if (!placed)
        throw Error(ErrorCode::PlacementFailure, "could not place the point cloud inside the image");

    std::normal_distribution<double> noise(0.0, cfg.noise_sigma_px);
    scene.corrs.reserve(n);
    for (const auto &x : points) {
        Vec2 pixel = project(scene.truth, x, cfg.intrinsics);
        if (cfg.noise_sigma_px > 0.0) {
            Vec2 e;
            do {
                const double ex = noise(rng);
                const double ey = noise(rng);
                e = Vec2(ex, ey);
            } while (e.norm() > kNoiseClip * cfg.noise_sigma_px);
            pixel += e;
        }
        scene.corrs.push_back(make_correspondence(x, pixel, cfg.intrinsics));
    }

    scene.outlier_flags.assign(n, false);
    const auto n_out = static_cast<std::size_t>(std::floor(cfg.outlier_ratio * static_cast<double>(n)));
    if (n_out > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::uniform_real_distribution<double> ux(0.0, cfg.image_width);
        std::uniform_real_distribution<double> uy(0.0, cfg.image_height);
        for (std::size_t i = 0; i < n_out; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(order[i], order[pick(rng)]);
            const std::size_t idx = order[i];
            const double u = ux(rng);
            const double v = uy(rng);
            scene.corrs[idx] = make_correspondence(scene.corrs[idx].world, Vec2(u, v), cfg.intrinsics);
            scene.outlier_flags[idx] = true;
        }
    }
    return scene;
}

std::string to_string(Method method) {
    switch (method) {
    case Method::Epnp: return "epnp";
    case Method::Aepnp: return "aepnp";
    case Method::AepnpRefine: return "aepnp+refine";
    case Method::RansacAepnp: return "ransac-aepnp";
    case Method::RansacAepnpRefine: return "ransac-aepnp+refine";
    }
    return "unknown";
}

double percentile(std::vector<double> values, double q) {
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

SweepRecord summarize(const std::string &parameter_name, double parameter_value, Method method, int trials,
                      std::span<const TrialErrors> successes) {
    if (trials < 1)
        throw Error(ErrorCode::ValidationError, "trials must be at least 1");
    SweepRecord rec;
    rec.parameter_name = parameter_name;
    rec.parameter_value = parameter_value;
    rec.method = to_string(method);
    rec.trials = trials;
    rec.failure_rate = 1.0 - static_cast<double>(successes.size()) / trials;

    auto column = [&](double TrialErrors::*field) {
        std::vector<double> v;
        v.reserve(successes.size());
        for (const auto &e : successes)
            v.push_back(e.*field);
        return v;
    };
    auto fill = [&](double TrialErrors::*field, double &median, double &iqr) {
        const auto v = column(field);
        median = percentile(v, 0.5);
        iqr = percentile(v, 0.75) - percentile(v, 0.25);
    };
    fill(&TrialErrors::r_err_deg, rec.median_r_err_deg, rec.iqr_r_err_deg);
    fill(&TrialErrors::t_err, rec.median_t_err, rec.iqr_t_err);
    fill(&TrialErrors::s1_err, rec.median_s1_err, rec.iqr_s1_err);
    fill(&TrialErrors::s2_err, rec.median_s2_err, rec.iqr_s2_err);

    const auto runtimes = column(&TrialErrors::runtime_us);
    rec.mean_runtime_us = runtimes.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : std::accumulate(runtimes.begin(), runtimes.end(), 0.0) /
                                                 static_cast<double>(runtimes.size());
    return rec;
}

TrialErrors run_method(Method method, const SyntheticScene &scene, const HarnessOptions &opts) {
    const CameraIntrinsics &k = scene.intrinsics;
    ScaledPose pose;
    const auto start = std::chrono::steady_clock::now();
    switch (method) {
    case Method::Epnp: {
        const EpnpResult r = epnp_solve(scene.corrs, k);
        pose.rotation = r.pose.rotation;
        pose.translation = r.pose.translation;
        break;
    }
    case Method::Aepnp: pose = aepnp_solve(scene.corrs, k).pose; break;
    case Method::AepnpRefine:
        pose = refine(aepnp_solve(scene.corrs, k).pose, scene.corrs, k, opts.refine).pose;
        break;
    case Method::RansacAepnp: pose = ransac_aepnp(scene.corrs, k, opts.ransac).pose; break;
    case Method::RansacAepnpRefine: {
        const RobustResult robust = ransac_aepnp(scene.corrs, k, opts.ransac);
        Correspondences inliers;
        for (std::size_t i = 0; i < scene.corrs.size(); ++i)
            if (robust.inlier_mask[i])
                inliers.push_back(scene.corrs[i]);
        pose = refine(robust.pose, inliers, k, opts.refine).pose;
        break;
    }
    }
    const auto stop = std::chrono::steady_clock::now();

    TrialErrors e;
    e.runtime_us = std::chrono::duration<double, std::micro>(stop - start).count();
    e.r_err_deg = rotation_error(pose.rotation, scene.truth.rotation);
    e.t_err = translation_error(pose.translation, scene.truth.translation);
    e.s1_err = scale_error(pose.s1, scene.truth.s1);
    e.s2_err = scale_error(pose.s2, scene.truth.s2);
    return e;
}

SweepRecords run_noise_sweep(std::span<const double> sigmas, int trials, const SceneConfig &base,
                             const HarnessOptions &opts) {
    SweepRecords out;
    const Method methods[] = {Method::Epnp, Method::Aepnp};
    for (double sigma : sigmas) {
        SceneConfig cfg = base;
        cfg.noise_sigma_px = sigma;
        run_point(out, "noise_sigma_px", sigma, methods, trials, cfg, opts, opts.threads);
    }
    return out;
}

SweepRecords run_count_sweep(std::span<const int> counts, double noise_sigma, int trials, const SceneConfig &base,
                             const HarnessOptions &opts) {
    SweepRecords out;
    const Method methods[] = {Method::Epnp, Method::Aepnp};
    for (int n : counts) {
        SceneConfig cfg = base;
        cfg.n_points = n;
        cfg.noise_sigma_px = noise_sigma;
        run_point(out, "n_points", n, methods, trials, cfg, opts, opts.threads);
    }
    return out;
}

SweepRecords run_timing(std::span<const int> counts, int trials, const SceneConfig &base,
                        const HarnessOptions &opts) {
    SweepRecords out;
    const Method methods[] = {Method::Epnp, Method::Aepnp};
    for (int n : counts) {
        SceneConfig cfg = base;
        cfg.n_points = n;
        run_point(out, "n_points", n, methods, trials, cfg, opts, 1);
    }
    return out;
}

SweepRecords run_outlier_sweep(std::span<const double> ratios, int trials, const SceneConfig &base,
                               bool with_refinement, const HarnessOptions &opts) {
    SweepRecords out;
    std::vector<Method> methods{Method::RansacAepnp};
    if (with_refinement)
        methods.push_back(Method::RansacAepnpRefine);
    for (double ratio : ratios) {
        SceneConfig cfg = base;
        cfg.outlier_ratio = ratio;
        run_point(out, "outlier_ratio", ratio, methods, trials, cfg, opts, opts.threads);
    }
    return out;
}

SweepRecords run_sparse_keypoint_protocol(int n_keypoints, double noise_sigma, int trials, const SceneConfig &base,
                                          const HarnessOptions &opts) {
    SweepRecords out;
    SceneConfig cfg = base;
    cfg.n_points = n_keypoints;
    cfg.noise_sigma_px = noise_sigma;
    const Method methods[] = {Method::Aepnp, Method::AepnpRefine};
    run_point(out, "n_keypoints", n_keypoints, methods, trials, cfg, opts, opts.threads);
    return out;
}

} // namespace aepnp
