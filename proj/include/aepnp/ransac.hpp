#pragma once

#include "aepnp/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace aepnp {

struct RansacConfig {
    int max_iterations = 1000;
    double inlier_threshold_px = 2.0;
    int sample_size = 6;
    double confidence = 0.99;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RobustResult {
    ScaledPose pose;
    std::vector<bool> inlier_mask;
    int iterations_run = 0;
    int best_inlier_count = 0;
    // Inlier count of the winning sample hypothesis, before the final re-estimation.
    int hypothesis_inlier_count = 0;
};

// Pixel distance between the observation and the projected model point;
// +inf when the point falls behind the camera.
double reprojection_residual(const ScaledPose &pose, const Correspondence &corr, const CameraIntrinsics &k);

// Squared residuals for all correspondences through the active SIMD kernel.
std::vector<double> squared_residuals(const ScaledPose &pose, std::span<const Correspondence> corrs,
                                      const CameraIntrinsics &k);

RobustResult ransac_aepnp(std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                          const RansacConfig &cfg);

} // namespace aepnp
