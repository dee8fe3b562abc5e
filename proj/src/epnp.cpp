#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace aepnp {
namespace {

// Centroid plus the principal axes scaled by the RMS spread along each.
ControlPointSet pca_control_points(std::span<const Vec3> points) {
    Vec3 mean = Vec3::Zero();
    for (const auto &p : points)
        mean += p;
    mean /= static_cast<double>(points.size());
    Mat3 cov = Mat3::Zero();
    for (const auto &p : points)
        cov += (p - mean) * (p - mean).transpose();
    cov /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    ControlPointSet cps;
    cps.world[0] = mean;
    for (int j = 0; j < 3; ++j)
        cps.world[j + 1] = mean + std::sqrt(std::max(eig.eigenvalues()(j), 0.0)) * eig.eigenvectors().col(j);
    return cps;
}

} // namespace

EpnpResult epnp_solve(std::span<const Correspondence> corrs, const CameraIntrinsics &k) {
    if (corrs.size() < kMinCorrespondences)
        throw Error(ErrorCode::TooFewCorrespondences,
                    "need at least " + std::to_string(kMinCorrespondences) + " correspondences, got " +
                        std::to_string(corrs.size()));
    if (!k.valid())
        throw Error(ErrorCode::ValidationError, "focal lengths must be positive");

    std::vector<Vec3> points;
    std::vector<Vec2> normalized;
    points.reserve(corrs.size());
    normalized.reserve(corrs.size());
    for (const auto &c : corrs) {
        points.push_back(c.world);
        normalized.push_back(normalize_pixel(k, c.pixel));
    }

    const ControlPointSet cps = pca_control_points(points);
    const BarycentricCoeffs coeffs = compute_alphas(points, cps);
    const DesignMatrix a = build_design_matrix(normalized, coeffs);
    const NullSpaceResult ns = null_space_vector(a);

    std::array<Vec3, 4> cam;
    for (int j = 0; j < 4; ++j)
        cam[j] = ns.vector.segment<3>(3 * j);

    // Least-squares scale matching camera-frame to world-frame pairwise distances.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double dc = (cam[i] - cam[j]).norm();
            num += dc * (cps.world[i] - cps.world[j]).norm();
            den += dc * dc;
        }
    if (!(den > 0.0))
        throw Error(ErrorCode::DegenerateMatrix, "camera control points coincide");
    double beta = num / den;

    EpnpResult out;
    out.diagnostics = ns.diagnostics;

    const Eigen::Vector4d cz(cam[0].z(), cam[1].z(), cam[2].z(), cam[3].z());
    const Eigen::VectorXd depths = coeffs.alphas * cz;
    const auto negative = (depths.array() < 0.0).count();
    const auto positive = (depths.array() > 0.0).count();
    out.diagnostics.cheirality_flips = static_cast<int>(negative);
    if (negative > positive || (negative == positive && cam[0].z() < 0.0))
        beta = -beta;
    for (auto &c : cam)
        c *= beta;

    Vec3 mean_cam = Vec3::Zero(), mean_world = Vec3::Zero();
    for (int j = 0; j < 4; ++j) {
        mean_cam += cam[j] / 4.0;
        mean_world += cps.world[j] / 4.0;
    }
    Mat3 cross = Mat3::Zero();
    for (int j = 0; j < 4; ++j)
        cross += (cam[j] - mean_cam) * (cps.world[j] - mean_world).transpose();

    out.pose.rotation = nearest_rotation(cross);
    out.pose.translation = mean_cam - out.pose.rotation.matrix() * mean_world;
    return out;
}

} // namespace aepnp
