#include <cmath>
#include <numbers>

#include "kfs/kernels/kernels.hpp"

namespace kfs::kernels::scalar {

// d(rho)_nm/dt as a five-point stencil in (n, m):
//   diag  : [i(h_n - h_m) - (gamma/2)(n + m) - kappa (n - m)^2] rho_nm
//   n - 1 : i p s_n rho_{n-1,m}
//   n + 1 : i (p* + lambda (n - m)) s_{n+1} rho_{n+1,m}
//   m + 1 : i (-p + lambda (n - m)) s_{m+1} rho_{n,m+1}
//   m - 1 : -i p* s_m rho_{n,m-1}
//   diag+1: gamma s_{n+1} s_{m+1} rho_{n+1,m+1}
// with h_n = Delta n + (U/2) n (n - 1), p = A e^{i theta}, s_k = sqrt(k).
void rhs_rows(const RhsCoefficients& c, const cplx* rho, cplx* out, int m, int n_begin, int n_end) {
    const int dim = c.dim;
    const double* sq = c.sqrt_n;
    const double pr = c.pump.real();
    const double pi = c.pump.imag();
    const cplx i_pump(-pi, pr);
    const cplx i_pump_conj(pi, pr);
    const cplx neg_i_pump(pi, -pr);
    const cplx neg_i_pump_conj(-pi, -pr);

    const cplx* col = rho + static_cast<std::ptrdiff_t>(m) * dim;
    const cplx* col_next = (m + 1 < dim) ? col + dim : nullptr;
    const cplx* col_prev = (m > 0) ? col - dim : nullptr;
    cplx* dst = out + static_cast<std::ptrdiff_t>(m) * dim;

    const double md = m;
    const double h_m = c.detuning * md + c.kerr_half * md * (md - 1.0);
    const double s_m = sq[m];
    const double s_m1 = sq[m + 1];

    for (int n = n_begin; n < n_end; ++n) {
        const double nd = n;
        const double h_n = c.detuning * nd + c.kerr_half * nd * (nd - 1.0);
        const double diff = nd - md;
        const cplx diag(-c.loss_half * (nd + md) - c.dephasing * diff * diff, h_n - h_m);
        cplx acc = diag * col[n];
        if (n > 0) acc += i_pump * sq[n] * col[n - 1];
        if (n + 1 < dim) {
            acc += (i_pump_conj + cplx(0.0, c.drift * diff)) * sq[n + 1] * col[n + 1];
            if (col_next != nullptr) acc += c.loss * sq[n + 1] * s_m1 * col_next[n + 1];
        }
        if (col_next != nullptr) acc += (neg_i_pump + cplx(0.0, c.drift * diff)) * s_m1 * col_next[n];
        if (col_prev != nullptr) acc += neg_i_pump_conj * s_m * col_prev[n];
        dst[n] = acc;
    }
}

void rhs(const RhsCoefficients& c, const cplx* rho, cplx* out, int m_begin, int m_end) {
    for (int m = m_begin; m < m_end; ++m) rhs_rows(c, rho, out, m, 0, c.dim);
}

namespace {

double wigner_point(const WignerTables& t, double x, double p) {
    const int dim = t.dim;
    const double r2 = x * x + p * p;
    const double r = std::sqrt(r2);
    const double arg = 4.0 * r2;
    const double log_arg = std::log(arg);
    const double cos1 = r > 0.0 ? x / r : 1.0;
    const double sin1 = r > 0.0 ? p / r : 0.0;

    double cos_d = 1.0;
    double sin_d = 0.0;
    double w = 0.0;
    for (int d = 0; d < dim; ++d) {
        // f_0^{(d)} = sqrt(1/d!) arg^{d/2} e^{-arg/2}, evaluated in the log domain.
        double f = (d == 0) ? std::exp(-0.5 * arg)
                            : std::exp(0.5 * d * log_arg - 0.5 * arg - t.half_lgamma[d]);
        double f_prev = 0.0;
        double acc_c = 0.0;
        double acc_s = 0.0;
        const std::size_t off = t.offset[d];
        const int len = dim - d;
        for (int n = 0; n < len; ++n) {
            const std::size_t k = off + n;
            acc_c += t.cos_coef[k] * f;
            acc_s += t.sin_coef[k] * f;
            const double f_next = (t.rec_a[k] - t.rec_x[k] * arg) * f - t.rec_b[k] * f_prev;
            f_prev = f;
            f = f_next;
        }
        w += acc_c * cos_d + acc_s * sin_d;
        const double c_next = cos_d * cos1 - sin_d * sin1;
        sin_d = sin_d * cos1 + cos_d * sin1;
        cos_d = c_next;
    }
    return w * (2.0 / std::numbers::pi);
}

}  // namespace

void wigner(const WignerTables& t, const double* x, const double* p, double* out, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) out[k] = wigner_point(t, x[k], p[k]);
}

}  // namespace kfs::kernels::scalar
