// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "aepnp/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace aepnp::simd {
namespace {

void gram12_avx2(const double *a, std::size_t rows, double *gram) {
    // acc[3 * i + b] holds columns 4b..4b+3 of row i of the full symmetric product.
    __m256d acc[36];
    for (auto &v : acc)
        v = _mm256_setzero_pd();
    for (std::size_t r = 0; r < rows; ++r) {
        const double *row = a + 12 * r;
        const __m256d c0 = _mm256_loadu_pd(row);
        const __m256d c1 = _mm256_loadu_pd(row + 4);
        const __m256d c2 = _mm256_loadu_pd(row + 8);
        for (int i = 0; i < 12; ++i) {
            const __m256d bi = _mm256_broadcast_sd(row + i);
            acc[3 * i] = _mm256_fmadd_pd(bi, c0, acc[3 * i]);
            acc[3 * i + 1] = _mm256_fmadd_pd(bi, c1, acc[3 * i + 1]);
            acc[3 * i + 2] = _mm256_fmadd_pd(bi, c2, acc[3 * i + 2]);
        }
    }
    double full[144];
    for (int i = 0; i < 12; ++i)
        for (int b = 0; b < 3; ++b)
            _mm256_storeu_pd(full + 12 * i + 4 * b, acc[3 * i + b]);
    std::fill(gram, gram + 144, 0.0);
    for (int i = 0; i < 12; ++i)
        for (int j = i; j < 12; ++j)
            gram[12 * i + j] = full[12 * i + j];
}

void sq_residuals_avx2(const ProjectionParams &p, const PointsSoA &pts, double *out) {
    const std::size_t n = pts.x.size();
    const __m256d m0 = _mm256_set1_pd(p.m[0]), m1 = _mm256_set1_pd(p.m[1]), m2 = _mm256_set1_pd(p.m[2]);
    const __m256d m3 = _mm256_set1_pd(p.m[3]), m4 = _mm256_set1_pd(p.m[4]), m5 = _mm256_set1_pd(p.m[5]);
    const __m256d m6 = _mm256_set1_pd(p.m[6]), m7 = _mm256_set1_pd(p.m[7]), m8 = _mm256_set1_pd(p.m[8]);
    const __m256d t0 = _mm256_set1_pd(p.t[0]), t1 = _mm256_set1_pd(p.t[1]), t2 = _mm256_set1_pd(p.t[2]);
    const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
    const __m256d cx = _mm256_set1_pd(p.cx), cy = _mm256_set1_pd(p.cy);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(pts.x.data() + i);
        const __m256d y = _mm256_loadu_pd(pts.y.data() + i);
        const __m256d z = _mm256_loadu_pd(pts.z.data() + i);
        const __m256d X = _mm256_fmadd_pd(m0, x, _mm256_fmadd_pd(m1, y, _mm256_fmadd_pd(m2, z, t0)));
        const __m256d Y = _mm256_fmadd_pd(m3, x, _mm256_fmadd_pd(m4, y, _mm256_fmadd_pd(m5, z, t1)));
        const __m256d Z = _mm256_fmadd_pd(m6, x, _mm256_fmadd_pd(m7, y, _mm256_fmadd_pd(m8, z, t2)));
        const __m256d front = _mm256_cmp_pd(Z, zero, _CMP_GT_OQ);
        const __m256d du =
            _mm256_sub_pd(_mm256_fmadd_pd(fx, _mm256_div_pd(X, Z), cx), _mm256_loadu_pd(pts.u.data() + i));
        const __m256d dv =
            _mm256_sub_pd(_mm256_fmadd_pd(fy, _mm256_div_pd(Y, Z), cy), _mm256_loadu_pd(pts.v.data() + i));
        const __m256d sq = _mm256_fmadd_pd(du, du, _mm256_mul_pd(dv, dv));
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(inf, sq, front));
    }
    if (i < n) {
        const PointsSoA tail{pts.x.subspan(i), pts.y.subspan(i), pts.z.subspan(i), pts.u.subspan(i),
                             pts.v.subspan(i)};
        scalar_kernels().sq_residuals(p, tail, out + i);
    }
}

} // namespace

const KernelTable &avx2_kernels() {
    static const KernelTable table{Isa::Avx2, &gram12_avx2, &sq_residuals_avx2};
    return table;
}

} // namespace aepnp::simd
