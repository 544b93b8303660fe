// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a cpuid check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "kfs/kernels/kernels.hpp"

namespace kfs::kernels::avx2 {

namespace {

// Two interleaved complex numbers per register: [re0, im0, re1, im1].
inline __m256d cmul(__m256d cr, __m256d ci, __m256d z) {
    const __m256d z_swapped = _mm256_permute_pd(z, 0b0101);
    return _mm256_fmaddsub_pd(cr, z, _mm256_mul_pd(ci, z_swapped));
}

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

inline __m256d pair(double lo, double hi) { return _mm256_set_pd(hi, hi, lo, lo); }

}  // namespace

void rhs(const RhsCoefficients& c, const cplx* rho, cplx* out, int m_begin, int m_end) {
    const int dim = c.dim;
    const double* sq = c.sqrt_n;
    const double pr = c.pump.real();
    const double pi = c.pump.imag();

    const __m256d v_pr = _mm256_set1_pd(pr);
    const __m256d v_pi = _mm256_set1_pd(pi);
    const __m256d v_det = _mm256_set1_pd(c.detuning);
    const __m256d v_kerr = _mm256_set1_pd(c.kerr_half);
    const __m256d v_loss_half = _mm256_set1_pd(c.loss_half);
    const __m256d v_deph = _mm256_set1_pd(c.dephasing);
    const __m256d v_drift = _mm256_set1_pd(c.drift);
    const __m256d one = _mm256_set1_pd(1.0);

    for (int m = m_begin; m < m_end; ++m) {
        const cplx* col = rho + static_cast<std::ptrdiff_t>(m) * dim;
        const cplx* col_next = (m + 1 < dim) ? col + dim : nullptr;
        const cplx* col_prev = (m > 0) ? col - dim : nullptr;
        cplx* dst = out + static_cast<std::ptrdiff_t>(m) * dim;

        const double md = m;
        const double h_m = c.detuning * md + c.kerr_half * md * (md - 1.0);
        const double s_m = sq[m];
        const double s_m1 = sq[m + 1];
        const __m256d v_m = _mm256_set1_pd(md);
        const __m256d v_h_m = _mm256_set1_pd(h_m);
        const __m256d v_s_m1 = _mm256_set1_pd(s_m1);
        const __m256d v_loss_sm1 = _mm256_set1_pd(c.loss * s_m1);
        const __m256d c4_re = _mm256_set1_pd(-pi * s_m);
        const __m256d c4_im = _mm256_set1_pd(-pr * s_m);

        // Row 0 and the last row(s) touch the stencil boundary; the scalar
        // reference handles them.
        scalar::rhs_rows(c, rho, out, m, 0, 1);
        int n = 1;
        for (; n + 2 <= dim - 1; n += 2) {
            const __m256d nv = pair(n, n + 1);
            const __m256d s_n = pair(sq[n], sq[n + 1]);
            const __m256d s_n1 = pair(sq[n + 1], sq[n + 2]);
            const __m256d diff = _mm256_sub_pd(nv, v_m);

            const __m256d h_n = _mm256_fmadd_pd(v_kerr, _mm256_mul_pd(nv, _mm256_sub_pd(nv, one)),
                                                _mm256_mul_pd(v_det, nv));
            const __m256d diag_re = _mm256_fnmadd_pd(
                v_deph, _mm256_mul_pd(diff, diff), _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), v_loss_half),
                                                                 _mm256_add_pd(nv, v_m)));
            const __m256d diag_im = _mm256_sub_pd(h_n, v_h_m);
            __m256d acc = cmul(diag_re, diag_im, load2(col + n));

            const __m256d c1_re = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), v_pi), s_n);
            const __m256d c1_im = _mm256_mul_pd(v_pr, s_n);
            acc = _mm256_add_pd(acc, cmul(c1_re, c1_im, load2(col + n - 1)));

            const __m256d drift_diff = _mm256_mul_pd(v_drift, diff);
            const __m256d c2_re = _mm256_mul_pd(v_pi, s_n1);
            const __m256d c2_im = _mm256_mul_pd(_mm256_add_pd(v_pr, drift_diff), s_n1);
            acc = _mm256_add_pd(acc, cmul(c2_re, c2_im, load2(col + n + 1)));

            if (col_next != nullptr) {
                const __m256d c3_re = _mm256_mul_pd(v_pi, v_s_m1);
                const __m256d c3_im = _mm256_mul_pd(_mm256_sub_pd(drift_diff, v_pr), v_s_m1);
                acc = _mm256_add_pd(acc, cmul(c3_re, c3_im, load2(col_next + n)));
                acc = _mm256_fmadd_pd(_mm256_mul_pd(v_loss_sm1, s_n1), load2(col_next + n + 1), acc);
            }
            if (col_prev != nullptr) {
                acc = _mm256_add_pd(acc, cmul(c4_re, c4_im, load2(col_prev + n)));
            }
            _mm256_storeu_pd(reinterpret_cast<double*>(dst + n), acc);
        }
        if (n < dim) scalar::rhs_rows(c, rho, out, m, n, dim);
    }
}

void wigner(const WignerTables& t, const double* x, const double* p, double* out, std::size_t count) {
    const int dim = t.dim;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d four = _mm256_set1_pd(4.0);

    alignas(32) double xb[4];
    alignas(32) double pb[4];
    alignas(32) double arg_b[4];
    alignas(32) double log_b[4];
    alignas(32) double f0_b[4];
    alignas(32) double res[4];

    for (std::size_t base = 0; base < count; base += 4) {
        const std::size_t lanes = (count - base < 4) ? count - base : 4;
        for (std::size_t l = 0; l < 4; ++l) {
            xb[l] = l < lanes ? x[base + l] : 0.0;
            pb[l] = l < lanes ? p[base + l] : 0.0;
        }
        const __m256d vx = _mm256_load_pd(xb);
        const __m256d vp = _mm256_load_pd(pb);
        const __m256d r2 = _mm256_fmadd_pd(vx, vx, _mm256_mul_pd(vp, vp));
        const __m256d r = _mm256_sqrt_pd(r2);
        const __m256d arg = _mm256_mul_pd(four, r2);
        _mm256_store_pd(arg_b, arg);
        for (int l = 0; l < 4; ++l) log_b[l] = std::log(arg_b[l]);

        const __m256d nonzero = _mm256_cmp_pd(r, zero, _CMP_GT_OQ);
        const __m256d safe_r = _mm256_blendv_pd(_mm256_set1_pd(1.0), r, nonzero);
        const __m256d cos1 = _mm256_blendv_pd(_mm256_set1_pd(1.0), _mm256_div_pd(vx, safe_r), nonzero);
        const __m256d sin1 = _mm256_blendv_pd(zero, _mm256_div_pd(vp, safe_r), nonzero);

        __m256d cos_d = _mm256_set1_pd(1.0);
        __m256d sin_d = zero;
        __m256d w = zero;
        for (int d = 0; d < dim; ++d) {
            if (d == 0) {
                for (int l = 0; l < 4; ++l) f0_b[l] = std::exp(-0.5 * arg_b[l]);
            } else {
                for (int l = 0; l < 4; ++l) {
                    f0_b[l] = std::exp(0.5 * d * log_b[l] - 0.5 * arg_b[l] - t.half_lgamma[d]);
                }
            }
            __m256d f = _mm256_load_pd(f0_b);
            __m256d f_prev = zero;
            __m256d acc_c = zero;
            __m256d acc_s = zero;
            const std::size_t off = t.offset[d];
            const int len = dim - d;
            for (int n = 0; n < len; ++n) {
                const std::size_t k = off + n;
                acc_c = _mm256_fmadd_pd(_mm256_broadcast_sd(t.cos_coef + k), f, acc_c);
                acc_s = _mm256_fmadd_pd(_mm256_broadcast_sd(t.sin_coef + k), f, acc_s);
                const __m256d lead = _mm256_fnmadd_pd(_mm256_broadcast_sd(t.rec_x + k), arg,
                                                      _mm256_broadcast_sd(t.rec_a + k));
                const __m256d f_next =
                    _mm256_fnmadd_pd(_mm256_broadcast_sd(t.rec_b + k), f_prev, _mm256_mul_pd(lead, f));
                f_prev = f;
                f = f_next;
            }
            w = _mm256_fmadd_pd(acc_c, cos_d, _mm256_fmadd_pd(acc_s, sin_d, w));
            const __m256d c_next = _mm256_fmsub_pd(cos_d, cos1, _mm256_mul_pd(sin_d, sin1));
            sin_d = _mm256_fmadd_pd(sin_d, cos1, _mm256_mul_pd(cos_d, sin1));
            cos_d = c_next;
        }
        _mm256_store_pd(res, _mm256_mul_pd(w, _mm256_set1_pd(2.0 / std::numbers::pi)));
        for (std::size_t l = 0; l < lanes; ++l) out[base + l] = res[l];
    }
}

}  // namespace kfs::kernels::avx2
