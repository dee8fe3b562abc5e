#pragma once

// Data-parallel inner loops shared by the solvers. Each kernel has a scalar
// reference implementation and optional vectorized variants; the dispatcher
// picks the widest one the running CPU supports.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace aepnp::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

// Model-to-camera affine map (row-major 3x3 linear part, then translation)
// plus pinhole intrinsics.
struct ProjectionParams {
    double m[9];
    double t[3];
    double fx, fy, cx, cy;
};

// Structure-of-arrays view of n correspondences.
struct PointsSoA {
    std::span<const double> x, y, z;
    std::span<const double> u, v;
};

struct KernelTable {
    Isa isa;

    // Upper triangle (row-major 12x12, lower left untouched) of A^T A for a
    // row-major rows x 12 matrix.
    void (*gram12)(const double *a, std::size_t rows, double *gram);

    // Squared pixel residuals; +inf where the camera-frame depth is <= 0.
    void (*sq_residuals)(const ProjectionParams &p, const PointsSoA &pts, double *out);
};

const KernelTable &scalar_kernels();
#if defined(AEPNP_HAVE_AVX2)
const KernelTable &avx2_kernels();
#endif
#if defined(AEPNP_HAVE_NEON)
const KernelTable &neon_kernels();
#endif

// Variants compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();
const KernelTable &kernels_for(Isa isa);

// Table used by the library. Defaults to the widest available ISA; the
// AEPNP_ISA environment variable (scalar, avx2, neon) overrides on first use.
const KernelTable &active_kernels();
void set_active_isa(Isa isa);

} // namespace aepnp::simd
