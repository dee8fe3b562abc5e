#include "aepnp/simd/kernels.hpp"

#include <algorithm>
#include <limits>

namespace aepnp::simd {
namespace {

void gram12_scalar(const double *a, std::size_t rows, double *gram) {
    std::fill(gram, gram + 144, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double *row = a + 12 * r;
        for (int i = 0; i < 12; ++i) {
            const double ri = row[i];
            if (ri == 0.0)
                continue;
            for (int j = i; j < 12; ++j)
                gram[12 * i + j] += ri * row[j];
        }
    }
}

void sq_residuals_scalar(const ProjectionParams &p, const PointsSoA &pts, double *out) {
    const std::size_t n = pts.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = pts.x[i], y = pts.y[i], z = pts.z[i];
        const double X = p.m[0] * x + p.m[1] * y + p.m[2] * z + p.t[0];
        const double Y = p.m[3] * x + p.m[4] * y + p.m[5] * z + p.t[1];
        const double Z = p.m[6] * x + p.m[7] * y + p.m[8] * z + p.t[2];
        if (!(Z > 0.0)) {
            out[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double du = p.fx * X / Z + p.cx - pts.u[i];
        const double dv = p.fy * Y / Z + p.cy - pts.v[i];
        out[i] = du * du + dv * dv;
    }
}

} // namespace

const KernelTable &scalar_kernels() {
    static const KernelTable table{Isa::Scalar, &gram12_scalar, &sq_residuals_scalar};
    return table;
}

} // namespace aepnp::simd
