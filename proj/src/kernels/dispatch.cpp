#include <cstdlib>
#include <string>

#include "kfs/kernels/kernels.hpp"

namespace kfs::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(KFS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

Isa detect_isa() {
    if (const char* env = std::getenv("KFS_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return Isa::scalar;
    }
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& kernel_table(Isa isa) {
    static const KernelTable scalar_table{Isa::scalar, &scalar::rhs, &scalar::wigner};
#if defined(KFS_HAVE_AVX2)
    static const KernelTable avx2_table{Isa::avx2, &avx2::rhs, &avx2::wigner};
    if (isa == Isa::avx2 && isa_available(Isa::avx2)) return avx2_table;
#endif
    return scalar_table;
}

const KernelTable& active() {
    static const KernelTable& table = kernel_table(detect_isa());
    return table;
}

}  // namespace kfs::kernels
