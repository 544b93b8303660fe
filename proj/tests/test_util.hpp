#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "kfs/fock.hpp"
#include "kfs/params.hpp"

namespace kfs::test {

/// Random full-rank state G G^dagger / Tr, supported on the lowest `support` levels.
inline DensityMatrix random_state(int dim, std::mt19937_64& rng, int support = -1) {
    if (support < 0) support = dim;
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix G(support, support);
    for (int i = 0; i < support; ++i) {
        for (int j = 0; j < support; ++j) G(i, j) = {g(rng), g(rng)};
    }
    m.topLeftCorner(support, support) = G * G.adjoint();
    m /= m.trace().real();
    return DensityMatrix(m);
}

/// Random Hermitian matrix, not normalized; exercises the generator off the state manifold.
inline ComplexMatrix random_hermitian(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) m(i, j) = {g(rng), g(rng)};
    }
    return (m + m.adjoint()) / 2.0;
}

inline ModelParams random_params(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModelParams p;
    p.u = 0.5 * std::abs(u(rng));
    p.delta = 2.0 * u(rng);
    p.amp = 2.0 * std::abs(u(rng));
    p.theta = 3.0 * u(rng);
    p.lam = std::abs(u(rng));
    p.eta = 0.3 + 0.7 * std::abs(u(rng));
    p.n_cut = dim;
    return p;
}

/// Dense matrix-product reference of the generator, written out term by term
/// from freshly built ladder operators.
inline ComplexMatrix reference_rhs(const ModelParams& p, const ComplexMatrix& rho) {
    const int d = static_cast<int>(rho.rows());
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const ComplexMatrix ad = a.adjoint();
    const ComplexMatrix num = ad * a;
    const std::complex<double> I(0.0, 1.0);
    const std::complex<double> e = std::exp(I * p.theta);

    ComplexMatrix H = ComplexMatrix::Zero(d, d);
    if (p.terms.hamiltonian) {
        H += p.delta * num;
        if (p.terms.pump) H += p.amp * (e * ad + std::conj(e) * a);
        if (p.terms.kerr) H += 0.5 * p.u * ad * ad * a * a;
    }
    ComplexMatrix out = I * (H * rho - rho * H);
    if (p.terms.lindblad) out -= 0.5 * (num * rho + rho * num - 2.0 * a * rho * ad);
    if (p.terms.dephasing && p.lam != 0.0) {
        const double kappa = p.lam * p.lam / (2.0 * p.eta);
        const ComplexMatrix inner = num * rho - rho * num;
        out -= kappa * (num * inner - inner * num);
    }
    if (p.terms.feedback_drift) {
        const ComplexMatrix x = rho * ad + a * rho;
        out += I * p.lam * (num * x - x * num);
    }
    return out;
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace kfs::test
