#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"

#include <cmath>
#include <vector>

namespace aepnp {
namespace {

// Target RMS spread of each preconditioned axis. Keeping the unit control points
// well inside the cloud makes the null vector dominated by c0, which keeps the
// singular-value gap wide under pixel noise.
constexpr double kPreconditionedRms = 10.0;

} // namespace

Preconditioner Preconditioner::from_points(std::span<const Correspondence> corrs) {
    Preconditioner pre;
    if (corrs.empty())
        throw Error(ErrorCode::TooFewCorrespondences, "no correspondences");
    Vec3 mean = Vec3::Zero();
    for (const auto &c : corrs)
        mean += c.world;
    mean /= static_cast<double>(corrs.size());
    Vec3 sq = Vec3::Zero();
    for (const auto &c : corrs)
        sq += (c.world - mean).cwiseAbs2();
    const Vec3 rms = (sq / static_cast<double>(corrs.size())).cwiseSqrt();
    for (int axis = 0; axis < 3; ++axis)
        if (!(rms(axis) >= 1e-9))
            throw Error(ErrorCode::AxisCollapse,
                        "world points have no extent along axis " + std::to_string(axis));
    pre.center = mean;
    pre.axis_scales = rms / kPreconditionedRms;
    return pre;
}

ScaledRotationParts decompose_scaled_rotation(const std::array<Vec3, 4> &cps_camera) {
    ScaledRotationParts out;
    out.translation = cps_camera[0];
    Mat3 columns;
    for (int j = 1; j < 4; ++j) {
        const Vec3 diff = cps_camera[j] - cps_camera[0];
        const double norm = diff.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error(ErrorCode::DegenerateMatrix, "control point coincides with the origin point");
        out.scales[j - 1] = norm;
        columns.col(j - 1) = diff / norm;
    }
    out.rotation = nearest_rotation(columns);
    return out;
}

namespace detail {

AepnpResult recover_scaled_pose(const Eigen::Matrix<double, 12, 1> &null_vector, const BarycentricCoeffs &coeffs,
                                const Preconditioner &pre, SolveDiagnostics diagnostics) {
    Eigen::Matrix<double, 12, 1> v = null_vector;

    // Depth of point i is sum_j alpha_ij * c_jz.
    const Eigen::Vector4d cz(v(2), v(5), v(8), v(11));
    const Eigen::VectorXd depths = coeffs.alphas * cz;
    const auto negative = (depths.array() < 0.0).count();
    const auto positive = (depths.array() > 0.0).count();
    diagnostics.cheirality_flips = static_cast<int>(negative);
    if (negative > positive || (negative == positive && v(2) < 0.0))
        v = -v;

    std::array<Vec3, 4> cps;
    for (int j = 0; j < 4; ++j)
        cps[j] = v.segment<3>(3 * j);
    const ScaledRotationParts parts = decompose_scaled_rotation(cps);

    // Overall scale is fixed by s_x = 1; the preconditioner scaled axis j by 1/k_j.
    const Vec3 &k = pre.axis_scales;
    const double sx = parts.scales[0];
    AepnpResult out;
    out.pose.rotation = parts.rotation;
    out.pose.s1 = (parts.scales[1] / sx) * (k.x() / k.y());
    out.pose.s2 = (parts.scales[2] / sx) * (k.x() / k.z());
    const Vec3 t_centered = parts.translation * (k.x() / sx);
    out.pose.translation = t_centered - out.pose.linear() * pre.center;
    out.diagnostics = diagnostics;
    return out;
}

} // namespace detail

AepnpResult aepnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k) {
    if (corrs.size() < kMinCorrespondences)
        throw Error(ErrorCode::TooFewCorrespondences,
                    "need at least " + std::to_string(kMinCorrespondences) + " correspondences, got " +
                        std::to_string(corrs.size()));
    return aepnp_solve(corrs, k, Preconditioner::from_points(corrs));
}

AepnpResult aepnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                        const Preconditioner &pre) {
    if (corrs.size() < kMinCorrespondences)
        throw Error(ErrorCode::TooFewCorrespondences,
                    "need at least " + std::to_string(kMinCorrespondences) + " correspondences, got " +
                        std::to_string(corrs.size()));
    if (!k.valid())
        throw Error(ErrorCode::ValidationError, "focal lengths must be positive");
    if (!(pre.axis_scales.array() > 0.0).all())
        throw Error(ErrorCode::ValidationError, "preconditioner divisors must be positive");

    std::vector<Vec3> points;
    std::vector<Vec2> normalized;
    points.reserve(corrs.size());
    normalized.reserve(corrs.size());
    for (const auto &c : corrs) {
        points.push_back(pre.apply(c.world));
        normalized.push_back(normalize_pixel(k, c.pixel));
    }

    const BarycentricCoeffs coeffs = compute_alphas(points, ControlPointSet::canonical());
    const DesignMatrix a = build_design_matrix(normalized, coeffs);
    const NullSpaceResult ns = null_space_vector(a);
    return detail::recover_scaled_pose(ns.vector, coeffs, pre, ns.diagnostics);
}

} // namespace aepnp
