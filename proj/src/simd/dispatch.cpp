#include "aepnp/simd/kernels.hpp"

#include "aepnp/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace aepnp::simd {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(AEPNP_HAVE_AVX2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Isa::Neon:
#if defined(AEPNP_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable *initial_table() {
    if (const char *env = std::getenv("AEPNP_ISA")) {
        const std::string name(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
            if (name == to_string(isa) && cpu_supports(isa))
                return &kernels_for(isa);
    }
    return &kernels_for(available_isas().back());
}

std::atomic<const KernelTable *> &active_slot() {
    static std::atomic<const KernelTable *> slot{initial_table()};
    return slot;
}

} // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (cpu_supports(isa))
            out.push_back(isa);
    return out;
}

const KernelTable &kernels_for(Isa isa) {
    if (!cpu_supports(isa))
        throw Error(ErrorCode::ValidationError, "ISA not available: " + std::string(to_string(isa)));
    switch (isa) {
#if defined(AEPNP_HAVE_AVX2)
    case Isa::Avx2: return avx2_kernels();
#endif
#if defined(AEPNP_HAVE_NEON)
    case Isa::Neon: return neon_kernels();
#endif
    default: return scalar_kernels();
    }
}

const KernelTable &active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

} // namespace aepnp::simd
