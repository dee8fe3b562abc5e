#include "aepnp/simd/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>
#include <limits>

namespace aepnp::simd {
namespace {

void gram12_neon(const double *a, std::size_t rows, double *gram) {
    // acc[6 * i + b] holds columns 2b, 2b+1 of row i.
    float64x2_t acc[72];
    for (auto &v : acc)
        v = vdupq_n_f64(0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double *row = a + 12 * r;
        float64x2_t c[6];
        for (int b = 0; b < 6; ++b)
            c[b] = vld1q_f64(row + 2 * b);
        for (int i = 0; i < 12; ++i) {
            const float64x2_t bi = vdupq_n_f64(row[i]);
            for (int b = 0; b < 6; ++b)
                acc[6 * i + b] = vfmaq_f64(acc[6 * i + b], bi, c[b]);
        }
    }
    double full[144];
    for (int i = 0; i < 12; ++i)
        for (int b = 0; b < 6; ++b)
            vst1q_f64(full + 12 * i + 2 * b, acc[6 * i + b]);
    std::fill(gram, gram + 144, 0.0);
    for (int i = 0; i < 12; ++i)
        for (int j = i; j < 12; ++j)
            gram[12 * i + j] = full[12 * i + j];
}

void sq_residuals_neon(const ProjectionParams &p, const PointsSoA &pts, double *out) {
    const std::size_t n = pts.x.size();
    const float64x2_t inf = vdupq_n_f64(std::numeric_limits<double>::infinity());
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vld1q_f64(pts.x.data() + i);
        const float64x2_t y = vld1q_f64(pts.y.data() + i);
        const float64x2_t z = vld1q_f64(pts.z.data() + i);
        auto row = [&](int k, double tk) {
            float64x2_t acc = vdupq_n_f64(tk);
            acc = vfmaq_n_f64(acc, z, p.m[3 * k + 2]);
            acc = vfmaq_n_f64(acc, y, p.m[3 * k + 1]);
            return vfmaq_n_f64(acc, x, p.m[3 * k]);
        };
        const float64x2_t X = row(0, p.t[0]);
        const float64x2_t Y = row(1, p.t[1]);
        const float64x2_t Z = row(2, p.t[2]);
        const uint64x2_t front = vcgtq_f64(Z, zero);
        const float64x2_t du = vsubq_f64(vfmaq_n_f64(vdupq_n_f64(p.cx), vdivq_f64(X, Z), p.fx),
                                         vld1q_f64(pts.u.data() + i));
        const float64x2_t dv = vsubq_f64(vfmaq_n_f64(vdupq_n_f64(p.cy), vdivq_f64(Y, Z), p.fy),
                                         vld1q_f64(pts.v.data() + i));
        const float64x2_t sq = vfmaq_f64(vmulq_f64(dv, dv), du, du);
        vst1q_f64(out + i, vbslq_f64(front, sq, inf));
    }
    if (i < n) {
        const PointsSoA tail{pts.x.subspan(i), pts.y.subspan(i), pts.z.subspan(i), pts.u.subspan(i),
                             pts.v.subspan(i)};
        scalar_kernels().sq_residuals(p, tail, out + i);
    }
}

} // namespace

const KernelTable &neon_kernels() {
    static const KernelTable table{Isa::Neon, &gram12_neon, &sq_residuals_neon};
    return table;
}

} // namespace aepnp::simd
