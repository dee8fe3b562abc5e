#include "aepnp/ransac.hpp"

#include "aepnp/error.hpp"
#include "aepnp/linear.hpp"
#include "aepnp/random.hpp"
#include "aepnp/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aepnp {
namespace {

constexpr int kMaxRefits = 10;

struct SoaBuffer {
    std::vector<double> x, y, z, u, v;

    explicit SoaBuffer(std::span<const Correspondence> corrs) {
        for (auto *vec : {&x, &y, &z, &u, &v})
            vec->reserve(corrs.size());
        for (const auto &c : corrs) {
            x.push_back(c.world.x());
            y.push_back(c.world.y());
            z.push_back(c.world.z());
            u.push_back(c.pixel.x());
            v.push_back(c.pixel.y());
        }
    }

    simd::PointsSoA view() const { return {x, y, z, u, v}; }
};

simd::ProjectionParams projection_params(const ScaledPose &pose, const CameraIntrinsics &k) {
    simd::ProjectionParams p{};
    const Mat3 m = pose.linear();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c)
            p.m[3 * r + c] = m(r, c);
        p.t[r] = pose.translation(r);
    }
    p.fx = k.fx;
    p.fy = k.fy;
    p.cx = k.cx;
    p.cy = k.cy;
    return p;
}

struct Score {
    int inliers = 0;
    double mean_residual = std::numeric_limits<double>::infinity();
};

Score score_mask(std::span<const double> sq, const std::vector<bool> &mask) {
    Score s;
    double sum = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i)
        if (mask[i]) {
            ++s.inliers;
            sum += std::sqrt(sq[i]);
        }
    if (s.inliers > 0)
        s.mean_residual = sum / s.inliers;
    return s;
}

std::vector<bool> threshold_mask(std::span<const double> sq, double threshold) {
    const double thr2 = threshold * threshold;
    std::vector<bool> mask(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        mask[i] = sq[i] <= thr2;
    return mask;
}

int required_iterations(double inlier_fraction, int sample_size, double confidence, int cap) {
    const double all_inlier = std::pow(inlier_fraction, sample_size);
    if (all_inlier >= 1.0)
        return 1;
    if (all_inlier <= 0.0)
        return cap;
    const double denom = std::log1p(-all_inlier);
    if (!(denom < 0.0))
        return cap;
    const double n = std::ceil(std::log1p(-confidence) / denom);
    return n < static_cast<double>(cap) ? std::max(1, static_cast<int>(n)) : cap;
}

} // namespace

void RansacConfig::validate() const {
    if (sample_size < static_cast<int>(kMinCorrespondences))
        throw Error(ErrorCode::ValidationError, "sample_size must be at least 6");
    if (!(inlier_threshold_px > 0.0))
        throw Error(ErrorCode::ValidationError, "inlier threshold must be positive");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw Error(ErrorCode::ValidationError, "confidence must lie in (0, 1)");
    if (max_iterations < 1)
        throw Error(ErrorCode::ValidationError, "max_iterations must be positive");
}

double reprojection_residual(const ScaledPose &pose, const Correspondence &corr, const CameraIntrinsics &k) {
    const Vec3 pc = pose.to_camera(corr.world);
    if (!(pc.z() > 0.0))
        return std::numeric_limits<double>::infinity();
    const Vec2 proj(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy);
    return (proj - corr.pixel).norm();
}

std::vector<double> squared_residuals(const ScaledPose &pose, std::span<const Correspondence> corrs,
                                      const CameraIntrinsics &k) {
    const SoaBuffer soa(corrs);
    std::vector<double> out(corrs.size());
    simd::active_kernels().sq_residuals(projection_params(pose, k), soa.view(), out.data());
    return out;
}

RobustResult ransac_aepnp(std::span<const Correspondence> corrs, const CameraIntrinsics &k,
                          const RansacConfig &cfg) {
    cfg.validate();
    const std::size_t n = corrs.size();
    const auto sample_size = static_cast<std::size_t>(cfg.sample_size);
    if (n < sample_size)
        throw Error(ErrorCode::TooFewCorrespondences,
                    "need at least " + std::to_string(sample_size) + " correspondences, got " + std::to_string(n));

    const SoaBuffer soa(corrs);
    const auto &kernels = simd::active_kernels();
    std::vector<double> sq(n);
    auto residuals_for = [&](const ScaledPose &pose) {
        kernels.sq_residuals(projection_params(pose, k), soa.view(), sq.data());
    };

    RobustResult best;
    Score best_score;
    bool found = false;
    int budget = cfg.max_iterations;
    std::vector<std::size_t> indices;
    Correspondences sample(sample_size);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    int iter = 0;
    for (; iter < budget; ++iter) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(iter));
        indices.clear();
        while (indices.size() < sample_size) {
            const std::size_t idx = pick(rng);
            if (std::find(indices.begin(), indices.end(), idx) == indices.end())
                indices.push_back(idx);
        }
        for (std::size_t s = 0; s < sample_size; ++s)
            sample[s] = corrs[indices[s]];

        ScaledPose hypothesis;
        try {
            hypothesis = aepnp_solve(sample, k).pose;
        } catch (const Error &) {
            continue;
        }

        residuals_for(hypothesis);
        std::vector<bool> mask = threshold_mask(sq, cfg.inlier_threshold_px);
        const Score score = score_mask(sq, mask);
        const bool better = score.inliers > best_score.inliers ||
                            (score.inliers == best_score.inliers && score.mean_residual < best_score.mean_residual);
        if (!found || better) {
            found = true;
            best_score = score;
            best.pose = hypothesis;
            best.inlier_mask = std::move(mask);
            best.best_inlier_count = score.inliers;
            best.hypothesis_inlier_count = score.inliers;
            budget = std::min(budget, required_iterations(static_cast<double>(score.inliers) / n, cfg.sample_size,
                                                          cfg.confidence, cfg.max_iterations));
        }
    }
    best.iterations_run = iter;

    if (!found || best_score.inliers < cfg.sample_size)
        throw Error(ErrorCode::NoHypothesisFound, "no sample produced a model with enough inliers");

    // Re-estimate on the inlier set and rescore until the set settles. A round
    // is kept only if it does not raise the mean residual on the current mask.
    Correspondences inliers;
    for (int round = 0; round < kMaxRefits; ++round) {
        inliers.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (best.inlier_mask[i])
                inliers.push_back(corrs[i]);
        ScaledPose refit;
        try {
            refit = aepnp_solve(inliers, k).pose;
        } catch (const Error &) {
            break;
        }
        residuals_for(refit);
        if (score_mask(sq, best.inlier_mask).mean_residual > best_score.mean_residual)
            break;
        best.pose = refit;
        std::vector<bool> mask = threshold_mask(sq, cfg.inlier_threshold_px);
        const Score score = score_mask(sq, mask);
        if (score.inliers < cfg.sample_size || mask == best.inlier_mask)
            break;
        best.inlier_mask = std::move(mask);
        best.best_inlier_count = score.inliers;
        best_score = score;
    }
    return best;
}

} // namespace aepnp
