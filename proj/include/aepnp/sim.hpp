#pragma once

#include "aepnp/geometry.hpp"
#include "aepnp/random.hpp"
#include "aepnp/ransac.hpp"
#include "aepnp/refine.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace aepnp {

struct SceneConfig {
    int n_points = 1024;
    double noise_sigma_px = 0.0;
    double outlier_ratio = 0.0;
    double scale_min = 0.5;
    double scale_max = 2.0;
    int image_width = 640;
    int image_height = 480;
    CameraIntrinsics intrinsics{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticScene {
    Correspondences corrs;
    CameraIntrinsics intrinsics;
    ScaledPose truth;
    std::vector<bool> outlier_flags;
};

// Uniform over SO(3) via a normalized Gaussian quaternion.
Rotation random_rotation(std::mt19937_64 &rng);

// Stored world points are the unscaled model; truth carries the anisotropic scales.
SyntheticScene generate_scene(const SceneConfig &cfg);

// AepnpRefine refines the linear estimate on all points; the RANSAC variants on inliers.
enum class Method { Epnp, Aepnp, AepnpRefine, RansacAepnp, RansacAepnpRefine };

std::string to_string(Method method);

struct TrialErrors {
    double r_err_deg = 0.0;
    double t_err = 0.0;
    double s1_err = 0.0;
    double s2_err = 0.0;
    double runtime_us = 0.0;
};

struct SweepRecord {
    std::string parameter_name;
    double parameter_value = 0.0;
    std::string method;
    int trials = 0;
    double failure_rate = 0.0;
    double median_r_err_deg = 0.0;
    double iqr_r_err_deg = 0.0;
    double median_t_err = 0.0;
    double iqr_t_err = 0.0;
    double median_s1_err = 0.0;
    double iqr_s1_err = 0.0;
    double median_s2_err = 0.0;
    double iqr_s2_err = 0.0;
    double mean_runtime_us = 0.0;
};

using SweepRecords = std::vector<SweepRecord>;

// Linear-interpolation percentile of unsorted values, q in [0, 1].
double percentile(std::vector<double> values, double q);

// Aggregates per-trial outcomes; failed trials only count towards failure_rate.
SweepRecord summarize(const std::string &parameter_name, double parameter_value, Method method, int trials,
                      std::span<const TrialErrors> successes);

struct HarnessOptions {
    // Worker threads for independent trials; 0 means hardware concurrency.
    unsigned threads = 0;
    RansacConfig ransac{};
    RefineConfig refine{};
};

// Solves one scene with the given method and scores it against the truth.
// Throws whatever the solver throws.
TrialErrors run_method(Method method, const SyntheticScene &scene, const HarnessOptions &opts);

SweepRecords run_noise_sweep(std::span<const double> sigmas, int trials, const SceneConfig &base,
                             const HarnessOptions &opts = {});
SweepRecords run_count_sweep(std::span<const int> counts, double noise_sigma, int trials,
                             const SceneConfig &base, const HarnessOptions &opts = {});
// Always single-threaded so that timings are not perturbed.
SweepRecords run_timing(std::span<const int> counts, int trials, const SceneConfig &base,
                        const HarnessOptions &opts = {});
SweepRecords run_outlier_sweep(std::span<const double> ratios, int trials, const SceneConfig &base,
                               bool with_refinement, const HarnessOptions &opts = {});
// Records linear AEPnP and, for reference, AEPnP followed by refinement.
SweepRecords run_sparse_keypoint_protocol(int n_keypoints, double noise_sigma, int trials,
                                          const SceneConfig &base, const HarnessOptions &opts = {});

} // namespace aepnp
