#pragma once

// Hot inner loops, each with a portable scalar reference and an AVX2+FMA
// variant selected once at runtime. Both variants must agree to rounding.

#include <complex>
#include <cstddef>
#include <string_view>

namespace kfs::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by this CPU and build. KFS_SIMD=scalar forces the
/// reference path.
Isa detect_isa();

/// True when `isa` can run here.
bool isa_available(Isa isa);

/// Coefficients of the five-point stencil form of the master equation
/// generator, already gated by the term toggles.
struct RhsCoefficients {
    int dim = 0;
    double detuning = 0.0;       // Delta
    double kerr_half = 0.0;      // U / 2
    cplx pump{};                 // A e^{i theta}
    double loss_half = 0.0;      // gamma / 2
    double loss = 0.0;           // gamma
    double dephasing = 0.0;      // lambda^2 / (2 eta)
    double drift = 0.0;          // lambda
    const double* sqrt_n = nullptr;  // sqrt(0), ..., sqrt(dim), dim + 1 entries
};

/// Writes columns [m_begin, m_end) of d(rho)/dt. `rho` and `out` are
/// column-major dim x dim, leading dimension dim, and must not alias.
using RhsFn = void (*)(const RhsCoefficients& c, const cplx* rho, cplx* out, int m_begin, int m_end);

/// Precomputed per-state tables for Wigner evaluation. Entries are stored
/// diagonal by diagonal: diagonal d (0 <= d < dim) holds dim - d entries
/// starting at offset[d].
struct WignerTables {
    int dim = 0;
    const std::size_t* offset = nullptr;  // dim entries
    const double* cos_coef = nullptr;     // (-1)^n Re(rho[n,n+d] + rho[n+d,n]), halved on d = 0
    const double* sin_coef = nullptr;     // (-1)^n Im(rho[n+d,n] - rho[n,n+d])
    const double* rec_a = nullptr;        // (2n + 1 + d) / sqrt((n+1)(n+1+d))
    const double* rec_x = nullptr;        // 1 / sqrt((n+1)(n+1+d))
    const double* rec_b = nullptr;        // sqrt(n(n+d)) / sqrt((n+1)(n+1+d))
    const double* half_lgamma = nullptr;  // lgamma(d + 1) / 2, dim entries
};

/// W(x + ip) for `count` points; writes `out[k]`.
using WignerFn = void (*)(const WignerTables& t, const double* x, const double* p, double* out, std::size_t count);

struct KernelTable {
    Isa isa;
    RhsFn rhs;
    WignerFn wigner;
};

const KernelTable& kernel_table(Isa isa);

/// Table for detect_isa(), resolved once.
const KernelTable& active();

namespace scalar {
/// Rows [n_begin, n_end) of column m only.
void rhs_rows(const RhsCoefficients& c, const cplx* rho, cplx* out, int m, int n_begin, int n_end);
void rhs(const RhsCoefficients& c, const cplx* rho, cplx* out, int m_begin, int m_end);
void wigner(const WignerTables& t, const double* x, const double* p, double* out, std::size_t count);
}  // namespace scalar

#if defined(KFS_HAVE_AVX2)
namespace avx2 {
void rhs(const RhsCoefficients& c, const cplx* rho, cplx* out, int m_begin, int m_end);
void wigner(const WignerTables& t, const double* x, const double* p, double* out, std::size_t count);
}  // namespace avx2
#endif

}  // namespace kfs::kernels
