#include "aepnp/geometry.hpp"

#include "aepnp/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aepnp {

Vec2 normalize_pixel(const CameraIntrinsics &k, const Vec2 &pixel) {
    return {(pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy};
}

Correspondence make_correspondence(const Vec3 &world, const Vec2 &pixel, const CameraIntrinsics &k) {
    return {world, pixel, normalize_pixel(k, pixel)};
}

bool is_rotation(const Mat3 &m, double tol) {
    if (!m.allFinite())
        return false;
    const Mat3 gram = m.transpose() * m - Mat3::Identity();
    return gram.cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation::Rotation(const Mat3 &m) : m_(m) {
    if (!is_rotation(m))
        throw Error(ErrorCode::ValidationError, "matrix is not a rotation");
}

Rotation Rotation::about_x(double a) {
    return Rotation(Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::about_y(double a) {
    return Rotation(Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::about_z(double a) {
    return Rotation(Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
    Eigen::Quaterniond q(w, x, y, z);
    if (!(q.norm() > 0.0))
        throw Error(ErrorCode::ValidationError, "zero quaternion");
    q.normalize();
    return Rotation(q.toRotationMatrix(), Unchecked{});
}

Eigen::Vector4d Rotation::quaternion() const {
    Eigen::Quaterniond q(m_);
    q.normalize();
    if (q.w() < 0.0)
        q.coeffs() = -q.coeffs();
    return {q.w(), q.x(), q.y(), q.z()};
}

Rotation Rotation::operator*(const Rotation &other) const { return Rotation(m_ * other.m_, Unchecked{}); }

Vec2 project(const ScaledPose &pose, const Vec3 &x, const CameraIntrinsics &k) {
    const Vec3 pc = pose.to_camera(x);
    if (!(pc.z() > 0.0))
        throw Error(ErrorCode::NonPositiveDepth, "point projects behind the camera");
    return {k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy};
}

double rotation_error(const Rotation &r, const Rotation &r_gt) {
    // atan2 of the skew and trace parts: same angle as acos((tr - 1) / 2), but
    // without the ~1e-6 degree resolution floor acos has near identity.
    const Mat3 d = r_gt.matrix().transpose() * r.matrix();
    const double c = (d.trace() - 1.0) / 2.0;
    const double s = 0.5 * Vec3(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)).norm();
    return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double translation_error(const Vec3 &t, const Vec3 &t_gt) { return (t - t_gt).norm(); }

double scale_error(double s, double s_gt) {
    if (!(s_gt > 0.0))
        throw Error(ErrorCode::InvalidGroundTruth, "ground-truth scale must be positive");
    return std::abs(s - s_gt) / s_gt;
}

Rotation nearest_rotation(const Mat3 &m) {
    if (!m.allFinite())
        throw Error(ErrorCode::DegenerateMatrix, "non-finite matrix");
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(2) < 1e-12)
        throw Error(ErrorCode::DegenerateMatrix, "matrix is singular");
    const Mat3 &u = svd.matrixU();
    const Mat3 &v = svd.matrixV();
    Vec3 d = Vec3::Ones();
    d(2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return Rotation(u * d.asDiagonal() * v.transpose(), Rotation::Unchecked{});
}

} // namespace aepnp
