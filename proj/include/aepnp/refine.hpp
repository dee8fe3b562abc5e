#pragma once

#include "aepnp/geometry.hpp"

#include <Eigen/Core>

#include <span>

namespace aepnp {

struct RefineConfig {
    int max_iterations = 50;
    double gradient_tolerance = 1e-10;
    double step_tolerance = 1e-12;
    double initial_damping = 1e-3;
};

struct RefineReport {
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RefineResult {
    ScaledPose pose;
    RefineReport report;
};

// Levenberg-damped Gauss-Newton over (rotation increment, translation, log s1, log s2)
// minimizing the summed squared reprojection error.
RefineResult refine(const ScaledPose &pose0, std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                    const RefineConfig &cfg = {});

namespace detail {

using Params8 = Eigen::Matrix<double, 8, 1>;
using Jacobian2x8 = Eigen::Matrix<double, 2, 8>;

// Applies the 8-vector increment: R <- R * exp([w]x), t <- t + dt, log s <- log s + ds.
ScaledPose apply_increment(const ScaledPose &pose, const Params8 &delta);

// Pixel residual project(pose, x) - pixel and its Jacobian with respect to the
// increment at zero. Returns false when the point is behind the camera.
bool residual_and_jacobian(const ScaledPose &pose, const Correspondence &corr, const CameraIntrinsics &k,
                           Eigen::Vector2d &residual, Jacobian2x8 *jacobian);

} // namespace detail

} // namespace aepnp
