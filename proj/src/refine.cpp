#include "aepnp/refine.hpp"

#include "aepnp/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <vector>

namespace aepnp {
namespace detail {
namespace {

Mat3 skew(const Vec3 &v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

Mat3 exp_so3(const Vec3 &w) {
    const double angle = w.norm();
    if (angle < 1e-12)
        return Mat3::Identity() + skew(w);
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

} // namespace

ScaledPose apply_increment(const ScaledPose &pose, const Params8 &delta) {
    ScaledPose out;
    out.rotation = nearest_rotation(pose.rotation.matrix() * exp_so3(delta.head<3>()));
    out.translation = pose.translation + delta.segment<3>(3);
    out.s1 = pose.s1 * std::exp(delta(6));
    out.s2 = pose.s2 * std::exp(delta(7));
    return out;
}

bool residual_and_jacobian(const ScaledPose &pose, const Correspondence &corr, const CameraIntrinsics &k,
                           Eigen::Vector2d &residual, Jacobian2x8 *jacobian) {
    const Mat3 &r = pose.rotation.matrix();
    const Vec3 sx(corr.world.x(), pose.s1 * corr.world.y(), pose.s2 * corr.world.z());
    const Vec3 pc = r * sx + pose.translation;
    if (!(pc.z() > 0.0))
        return false;
    const double iz = 1.0 / pc.z();
    residual << k.fx * pc.x() * iz + k.cx - corr.pixel.x(), k.fy * pc.y() * iz + k.cy - corr.pixel.y();
    if (jacobian == nullptr)
        return true;

    Eigen::Matrix<double, 2, 3> dproj;
    dproj << k.fx * iz, 0.0, -k.fx * pc.x() * iz * iz, 0.0, k.fy * iz, -k.fy * pc.y() * iz * iz;

    Eigen::Matrix<double, 3, 8> dpc;
    dpc.block<3, 3>(0, 0) = -r * skew(sx);
    dpc.block<3, 3>(0, 3) = Mat3::Identity();
    dpc.col(6) = r.col(1) * sx.y();
    dpc.col(7) = r.col(2) * sx.z();
    *jacobian = dproj * dpc;
    return true;
}

} // namespace detail

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using detail::Params8;

struct Normal {
    Mat8 h = Mat8::Zero();
    Params8 g = Params8::Zero();
    double cost = 0.0;
};

// Cost over the active set; +inf if any active point moved behind the camera.
double evaluate_cost(const ScaledPose &pose, std::span<const Correspondence> corrs,
                     const std::vector<char> &active, const CameraIntrinsics &k) {
    double cost = 0.0;
    Eigen::Vector2d r;
    for (std::size_t i = 0; i < corrs.size(); ++i) {
        if (!active[i])
            continue;
        if (!detail::residual_and_jacobian(pose, corrs[i], k, r, nullptr))
            return std::numeric_limits<double>::infinity();
        cost += r.squaredNorm();
    }
    return cost;
}

Normal build_normal(const ScaledPose &pose, std::span<const Correspondence> corrs, const std::vector<char> &active,
                    const CameraIntrinsics &k) {
    Normal ne;
    Eigen::Vector2d r;
    detail::Jacobian2x8 j;
    for (std::size_t i = 0; i < corrs.size(); ++i) {
        if (!active[i] || !detail::residual_and_jacobian(pose, corrs[i], k, r, &j))
            continue;
        ne.h.noalias() += j.transpose() * j;
        ne.g.noalias() += j.transpose() * r;
        ne.cost += r.squaredNorm();
    }
    return ne;
}

} // namespace

RefineResult refine(const ScaledPose &pose0, std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                    const RefineConfig &cfg) {
    if (!(cfg.max_iterations > 0 && cfg.gradient_tolerance > 0.0 && cfg.step_tolerance > 0.0 &&
          cfg.initial_damping > 0.0))
        throw Error(ErrorCode::ValidationError, "refinement settings must be positive");
    if (!(pose0.s1 > 0.0 && pose0.s2 > 0.0))
        throw Error(ErrorCode::ValidationError, "initial scales must be positive");

    std::vector<char> active(corrs.size(), 0);
    std::size_t n_active = 0;
    for (std::size_t i = 0; i < corrs.size(); ++i)
        if (pose0.to_camera(corrs[i].world).z() > 0.0) {
            active[i] = 1;
            ++n_active;
        }
    if (n_active < 4)
        throw Error(ErrorCode::InsufficientResiduals, "need at least 4 correspondences in front of the camera");

    RefineResult out;
    out.pose = pose0;
    Normal ne = build_normal(out.pose, corrs, active, k);
    out.report.initial_cost = ne.cost;
    out.report.final_cost = ne.cost;

    double damping = cfg.initial_damping;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (ne.g.cwiseAbs().maxCoeff() < cfg.gradient_tolerance) {
            out.report.converged = true;
            break;
        }
        out.report.iterations = iter + 1;

        bool accepted = false;
        while (!accepted) {
            Mat8 damped = ne.h;
            const double floor = 1e-12 * std::max(ne.h.diagonal().maxCoeff(), 1.0);
            for (int d = 0; d < 8; ++d)
                damped(d, d) += damping * std::max(ne.h(d, d), floor);
            Eigen::LDLT<Mat8> ldlt(damped);
            const Params8 step = ldlt.solve(-ne.g);
            if (ldlt.info() != Eigen::Success || !step.allFinite()) {
                damping *= 10.0;
                if (damping > 1e32)
                    throw Error(ErrorCode::NumericalFailure, "normal equations are singular");
                continue;
            }

            const ScaledPose candidate = detail::apply_increment(out.pose, step);
            const double cost = evaluate_cost(candidate, corrs, active, k);
            if (cost <= ne.cost) {
                accepted = true;
                damping = std::max(damping / 3.0, 1e-12);
                out.pose = candidate;
                ne = build_normal(out.pose, corrs, active, k);
                out.report.final_cost = ne.cost;
                if (step.norm() < cfg.step_tolerance) {
                    out.report.converged = true;
                    return out;
                }
            } else {
                damping *= 10.0;
                if (damping > 1e16) {
                    // No descent direction left at machine precision.
                    out.report.converged = true;
                    return out;
                }
            }
        }
    }
    return out;
}

} // namespace aepnp
