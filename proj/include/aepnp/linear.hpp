#pragma once

#include "aepnp/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>

namespace aepnp {

// Four reference points c0..c3 in the (preconditioned) world frame, plus their
// recovered camera-frame images once a solve has run.
struct ControlPointSet {
    std::array<Vec3, 4> world;
    std::optional<std::array<Vec3, 4>> camera;

    // c0 = 0, cj = e_j.
    static ControlPointSet canonical();
    // Basis matrix [c1 - c0, c2 - c0, c3 - c0].
    Mat3 basis() const;
};

// n x 4 affine weights; row i reconstructs point i from the control points.
struct BarycentricCoeffs {
    Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor> alphas;
};

// 2n x 12 homogeneous system over the stacked camera-frame control points.
struct DesignMatrix {
    Eigen::Matrix<double, Eigen::Dynamic, 12, Eigen::RowMajor> a;
};

// Per-axis divisors applied to world coordinates before solving, around a centroid.
struct Preconditioner {
    Vec3 center = Vec3::Zero();
    Vec3 axis_scales = Vec3::Ones();

    // Centroid and divisors mapping each axis to an RMS spread of 10.
    // Throws AxisCollapse when an axis spread is below 1e-9.
    static Preconditioner from_points(std::span<const Correspondence> corrs);
    Vec3 apply(const Vec3 &x) const { return (x - center).cwiseQuotient(axis_scales); }
};

struct SolveDiagnostics {
    // Second-smallest then smallest singular value of the design matrix.
    std::array<double, 2> smallest_singular_values{0.0, 0.0};
    // sigma_11 / sigma_12; infinite when the smallest is exactly zero.
    double condition_gap = 0.0;
    int cheirality_flips = 0;
};

inline constexpr std::size_t kMinCorrespondences = 6;
inline constexpr double kMinConditionGap = 10.0;

BarycentricCoeffs compute_alphas(std::span<const Vec3> points, const ControlPointSet &cps);

DesignMatrix build_design_matrix(std::span<const Vec2> normalized, const BarycentricCoeffs &coeffs);

struct NullSpaceResult {
    Eigen::Matrix<double, 12, 1> vector;
    SolveDiagnostics diagnostics;
};

// Unit right singular vector for the smallest singular value, without the
// separation check. Needs at least 12 rows.
NullSpaceResult smallest_right_singular_vector(const DesignMatrix &a);

// As above, and throws RankDeficient when condition_gap < kMinConditionGap,
// i.e. when the null space is not clearly one-dimensional.
NullSpaceResult null_space_vector(const DesignMatrix &a);

struct ScaledRotationParts {
    Rotation rotation;
    std::array<double, 3> scales{};
    Vec3 translation = Vec3::Zero();
};

// Splits canonical-frame camera control points into t = c0, per-axis scales and
// an orthonormalized rotation.
ScaledRotationParts decompose_scaled_rotation(const std::array<Vec3, 4> &cps_camera);

struct AepnpResult {
    ScaledPose pose;
    SolveDiagnostics diagnostics;
};

AepnpResult aepnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k);
// Same pipeline with an explicit preconditioner instead of the data-derived one.
AepnpResult aepnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                        const Preconditioner &pre);

struct RigidPose {
    Rotation rotation;
    Vec3 translation = Vec3::Zero();
};

struct EpnpResult {
    RigidPose pose;
    SolveDiagnostics diagnostics;
};

namespace detail {

// Steps after the null-space solve: sign fix by cheirality, decomposition,
// gauge fix and undoing the preconditioner. `coeffs` are the canonical-frame
// weights the design matrix was built from.
AepnpResult recover_scaled_pose(const Eigen::Matrix<double, 12, 1> &null_vector, const BarycentricCoeffs &coeffs,
                                const Preconditioner &pre, SolveDiagnostics diagnostics);

} // namespace detail

// Classical EPnP, rank-1 null-space branch only.
EpnpResult epnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k);

} // namespace aepnp
