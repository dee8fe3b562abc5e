#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"
#include "aepnp/simd/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace aepnp {

namespace {

// Below this sigma_2 / sigma_max ratio the normal-matrix route loses more than
// about 1e-12 relative accuracy in the null vector (error ~ eps * ratio^-2).
constexpr double kGramConditionLimit = 1e-2;
constexpr double kRoundoffFloor = 1e-12;

} // namespace

ControlPointSet ControlPointSet::canonical() {
    return {{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, std::nullopt};
}

Mat3 ControlPointSet::basis() const {
    Mat3 b;
    for (int j = 1; j < 4; ++j)
        b.col(j - 1) = world[j] - world[0];
    return b;
}

BarycentricCoeffs compute_alphas(std::span<const Vec3> points, const ControlPointSet &cps) {
    const Mat3 basis = cps.basis();
    Eigen::JacobiSVD<Mat3> svd(basis);
    const auto &sv = svd.singularValues();
    if (!basis.allFinite() || !(sv(2) > 1e-12 * sv(0)))
        throw Error(ErrorCode::DegenerateControlPoints, "control-point basis is singular");

    const bool canonical = cps.world[0].isZero(0.0) && basis.isIdentity(0.0);
    const Mat3 inv = canonical ? Mat3::Identity() : Mat3(basis.inverse());

    BarycentricCoeffs out;
    out.alphas.resize(static_cast<Eigen::Index>(points.size()), 4);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 a = inv * (points[i] - cps.world[0]);
        const auto r = static_cast<Eigen::Index>(i);
        out.alphas(r, 0) = 1.0 - a.sum();
        out.alphas.block<1, 3>(r, 1) = a.transpose();
    }
    return out;
}

DesignMatrix build_design_matrix(std::span<const Vec2> normalized, const BarycentricCoeffs &coeffs) {
    const std::size_t n = normalized.size();
    if (n < kMinCorrespondences)
        throw Error(ErrorCode::TooFewCorrespondences,
                    "need at least " + std::to_string(kMinCorrespondences) + " correspondences, got " +
                        std::to_string(n));
    if (static_cast<std::size_t>(coeffs.alphas.rows()) != n)
        throw Error(ErrorCode::ValidationError, "coefficient rows do not match correspondences");

    DesignMatrix out;
    out.a.setZero(static_cast<Eigen::Index>(2 * n), 12);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double ux = normalized[i].x();
        const double uy = normalized[i].y();
        for (int j = 0; j < 4; ++j) {
            const double alpha = coeffs.alphas(r, j);
            out.a(2 * r, 3 * j) = alpha;
            out.a(2 * r, 3 * j + 2) = -ux * alpha;
            out.a(2 * r + 1, 3 * j + 1) = alpha;
            out.a(2 * r + 1, 3 * j + 2) = -uy * alpha;
        }
    }
    return out;
}

NullSpaceResult smallest_right_singular_vector(const DesignMatrix &a) {
    if (a.a.rows() < 12)
        throw Error(ErrorCode::TooFewCorrespondences, "design matrix needs at least 12 rows");

    // Right singular vectors of A are the eigenvectors of A^T A.
    Eigen::Matrix<double, 12, 12, Eigen::RowMajor> gram;
    simd::active_kernels().gram12(a.a.data(), static_cast<std::size_t>(a.a.rows()), gram.data());
    gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(gram);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::NumericalFailure, "eigen-decomposition of the normal matrix failed");

    const auto &values = eig.eigenvalues();
    double smallest = std::sqrt(std::max(values(0), 0.0));
    double second = std::sqrt(std::max(values(1), 0.0));
    const double largest = std::sqrt(std::max(values(11), 0.0));

    NullSpaceResult out;
    if (second >= kGramConditionLimit * largest) {
        out.vector = eig.eigenvectors().col(0).normalized();
    } else {
        // Forming A^T A squares the condition number, which costs accuracy when
        // sigma_2 / sigma_max is small. Take the SVD of the triangular QR factor
        // of A instead, which only sees the condition of A itself.
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.a);
        const Eigen::Matrix<double, 12, 12> r = qr.matrixQR().topRows<12>().triangularView<Eigen::Upper>();
        const Eigen::JacobiSVD<Eigen::Matrix<double, 12, 12>> svd(r, Eigen::ComputeFullV);
        out.vector = svd.matrixV().col(11).normalized();
        smallest = svd.singularValues()(11);
        second = svd.singularValues()(10);
    }
    out.diagnostics.smallest_singular_values = {second, smallest};
    // Two singular values at roundoff level mean a null space of dimension >= 2,
    // whatever their ratio happens to be.
    if (second <= kRoundoffFloor * largest)
        out.diagnostics.condition_gap = 0.0;
    else if (smallest > 0.0)
        out.diagnostics.condition_gap = second / smallest;
    else
        out.diagnostics.condition_gap = second > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return out;
}

NullSpaceResult null_space_vector(const DesignMatrix &a) {
    NullSpaceResult out = smallest_right_singular_vector(a);
    if (!(out.diagnostics.condition_gap >= kMinConditionGap))
        throw Error(ErrorCode::RankDeficient,
                    "null space is not one-dimensional (singular value gap " +
                        std::to_string(out.diagnostics.condition_gap) + ")");
    return out;
}

} // namespace aepnp
