#pragma once

#include <Eigen/Core>

#include <vector>

namespace aepnp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pinhole intrinsics in pixels. fx and fy must be positive.
struct CameraIntrinsics {
    double fx = 150.0;
    double fy = 150.0;
    double cx = 320.0;
    double cy = 240.0;

    bool valid() const { return fx > 0.0 && fy > 0.0; }
};

Vec2 normalize_pixel(const CameraIntrinsics &k, const Vec2 &pixel);

struct Correspondence {
    Vec3 world = Vec3::Zero();
    Vec2 pixel = Vec2::Zero();
    Vec2 normalized = Vec2::Zero();
};

// Builds a correspondence with the normalized coordinates filled in from k.
Correspondence make_correspondence(const Vec3 &world, const Vec2 &pixel, const CameraIntrinsics &k);

using Correspondences = std::vector<Correspondence>;

// Element of SO(3). Construction from an arbitrary matrix checks orthonormality;
// use nearest_rotation() to project a noisy estimate.
class Rotation {
  public:
    Rotation() : m_(Mat3::Identity()) {}
    explicit Rotation(const Mat3 &m);

    static Rotation about_x(double radians);
    static Rotation about_y(double radians);
    static Rotation about_z(double radians);
    static Rotation from_quaternion(double w, double x, double y, double z);

    const Mat3 &matrix() const { return m_; }

    // Unit quaternion (w, x, y, z) with w >= 0.
    Eigen::Vector4d quaternion() const;

    Rotation operator*(const Rotation &other) const;

  private:
    struct Unchecked {};
    Rotation(const Mat3 &m, Unchecked) : m_(m) {}
    friend Rotation nearest_rotation(const Mat3 &m);

    Mat3 m_;
};

bool is_rotation(const Mat3 &m, double tol = 1e-9);

// Pose of an anisotropically scaled model: p_camera = R * diag(1, s1, s2) * x + t.
// The x-axis scale is fixed to one.
struct ScaledPose {
    Rotation rotation;
    Vec3 translation = Vec3::Zero();
    double s1 = 1.0;
    double s2 = 1.0;

    Mat3 scale_matrix() const { return Eigen::Vector3d(1.0, s1, s2).asDiagonal(); }
    // R * S, the linear part of the model-to-camera map.
    Mat3 linear() const { return rotation.matrix() * scale_matrix(); }
    Vec3 to_camera(const Vec3 &x) const { return linear() * x + translation; }
};

// Throws NonPositiveDepth when the camera-frame depth is <= 0.
Vec2 project(const ScaledPose &pose, const Vec3 &x, const CameraIntrinsics &k);

// Geodesic angle between two rotations, in degrees, within [0, 180].
double rotation_error(const Rotation &r, const Rotation &r_gt);
double translation_error(const Vec3 &t, const Vec3 &t_gt);
// Relative error |s - s_gt| / s_gt as a fraction. Throws InvalidGroundTruth if s_gt <= 0.
double scale_error(double s, double s_gt);

// Closest rotation in Frobenius norm, via SVD with determinant-sign correction.
// Throws DegenerateMatrix when the smallest singular value is below 1e-12.
Rotation nearest_rotation(const Mat3 &m);

} // namespace aepnp
