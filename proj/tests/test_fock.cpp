#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "kfs/errors.hpp"
#include "kfs/fock.hpp"
#include "test_util.hpp"

using namespace kfs;
using kfs::test::max_abs;

TEST_CASE("ladder operators") {
    const FockOperator a = annihilation_op(5);
    CHECK(a(0, 1) == cplx(1.0));
    CHECK(a(3, 4).real() == doctest::Approx(2.0));
    const FockOperator n = creation_op(5) * a;
    for (int k = 0; k < 5; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
    CHECK(max_abs(n.entries() - number_op(5).entries()) < 1e-15);
    CHECK_THROWS_AS(annihilation_op(1), DimensionError);
    CHECK_THROWS_AS(a * annihilation_op(4), DimensionError);
}

TEST_CASE("hamiltonian is hermitian with a real diagonal") {
    ModelParams p;
    p.u = 0.3;
    p.delta = -1.2;
    p.amp = 3.0;
    p.theta = 0.7;
    p.n_cut = 12;
    const FockOperator H = build_hamiltonian(p);
    CHECK(max_abs(H.entries() - H.entries().adjoint()) < 1e-14);
    // (U/2) n(n-1) + Delta n on the diagonal
    CHECK(H(3, 3).real() == doctest::Approx(0.15 * 6 - 3.6));
    // pump above the diagonal: <n|A e^{i theta} a^dag|n-1>
    CHECK(std::abs(H(1, 0) - 3.0 * std::exp(cplx(0, 0.7))) < 1e-14);
}

TEST_CASE("generator matches the dense matrix-product reference") {
    std::mt19937_64 rng(11);
    for (int dim : {2, 3, 7, 16, 33}) {
        for (int trial = 0; trial < 5; ++trial) {
            const ModelParams p = test::random_params(dim, rng);
            const ComplexMatrix rho = test::random_hermitian(dim, rng);
            const ComplexMatrix ref = test::reference_rhs(p, rho);
            const ComplexMatrix got = apply_rhs(p, DensityMatrix(rho));
            CHECK(max_abs(got - ref) < 1e-11 * (1.0 + max_abs(ref)));
        }
    }
}

TEST_CASE("liouvillian agrees with the generator on random states") {
    std::mt19937_64 rng(4);
    ModelParams p = test::random_params(4, rng);
    const SparseComplex L = build_liouvillian(p);
    CHECK(L.rows() == 16);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = test::random_state(4, rng);
        const ComplexMatrix via_l = unvectorize(L * vectorize(rho.entries()), 4);
        CHECK(max_abs(via_l - apply_rhs(p, rho)) < 1e-12);
    }
    CHECK_THROWS_AS(build_liouvillian(p, 3), ResourceError);
}

TEST_CASE("two-level dissipator written by hand") {
    // D = 2, loss only: d rho/dt = -(1/2){n, rho} + a rho a^dag
    ModelParams p;
    p.n_cut = 2;
    p.terms = TermToggles::none();
    p.terms.lindblad = true;
    const SparseComplex L = build_liouvillian(p);
    // vec order: rho00, rho10, rho01, rho11
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected(0, 3) = 1.0;
    expected(1, 1) = -0.5;
    expected(2, 2) = -0.5;
    expected(3, 3) = -1.0;
    CHECK(max_abs(Eigen::MatrixXcd(L) - expected) < 1e-15);
}

TEST_CASE("trace and hermiticity preserved for every toggle subset") {
    std::mt19937_64 rng(7);
    for (int dim : {4, 16, 64}) {
        ModelParams p = test::random_params(dim, rng);
        for (int mask = 0; mask < 64; ++mask) {
            p.terms = {bool(mask & 1), bool(mask & 2), bool(mask & 4), bool(mask & 8), bool(mask & 16), bool(mask & 32)};
            const DensityMatrix rho = test::random_state(dim, rng);
            const ComplexMatrix d = apply_rhs(p, rho);
            CHECK(std::abs(d.trace()) < 1e-12 * dim);
            CHECK(max_abs(d - d.adjoint()) < 1e-12 * dim);
        }
    }
}

TEST_CASE("dephasing acts elementwise with rate kappa (n - m)^2") {
    std::mt19937_64 rng(3);
    ModelParams p;
    p.n_cut = 8;
    p.lam = 0.9;
    p.eta = 0.6;
    p.terms = TermToggles::none();
    p.terms.dephasing = true;
    const DensityMatrix rho = test::random_state(8, rng);
    const ComplexMatrix d = apply_rhs(p, rho);
    const double kappa = 0.81 / 1.2;
    for (int n = 0; n < 8; ++n) {
        for (int m = 0; m < 8; ++m) {
            CHECK(std::abs(d(n, m) + kappa * (n - m) * (n - m) * rho(n, m)) < 1e-13);
        }
    }
}

TEST_CASE("amplitude equation of the linear cavity") {
    // d<a>/dt = (i Delta - 1/2) <a> + i A e^{i theta}, exact while the top levels are empty
    std::mt19937_64 rng(5);
    ModelParams p;
    p.n_cut = 12;
    p.delta = 0.8;
    p.amp = 1.3;
    p.theta = -0.4;
    const ComplexMatrix a = annihilation_op(12).entries();
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = test::random_state(12, rng, 10);
        const cplx mean_a = (a * rho.entries()).trace();
        const cplx rate = (a * apply_rhs(p, rho)).trace();
        const cplx expected = cplx(-0.5, 0.8) * mean_a + cplx(0, 1) * 1.3 * std::exp(cplx(0, -0.4));
        CHECK(std::abs(rate - expected) < 1e-12);
    }
}

TEST_CASE("state constructors and diagnostics") {
    const DensityMatrix f = DensityMatrix::fock(2, 6);
    CHECK(f(2, 2) == cplx(1.0));
    CHECK(f.diagnostics().ok());
    CHECK_THROWS(DensityMatrix::fock(6, 6));

    const DensityMatrix c = DensityMatrix::coherent(cplx(0, 2), 40);
    CHECK(std::abs(c.trace() - 1.0) < 1e-14);
    CHECK(coherent_fidelity(c, cplx(0, 2)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coherent_fidelity(c, cplx(0, -2)) < 1e-6);
    CHECK(tail_mass(c) < 1e-10);
    CHECK(trace_distance(c, c) < 1e-12);
    CHECK(trace_distance(DensityMatrix::fock(0, 4), DensityMatrix::fock(1, 4)) == doctest::Approx(2.0));

    ComplexMatrix skew = c.entries();
    skew(0, 1) += cplx(1e-3, 0);
    DensityMatrix s(skew);
    CHECK(s.hermiticity_residue() == doctest::Approx(1e-3));
    CHECK(s.hermitize() == doctest::Approx(5e-4));
    CHECK(s.hermiticity_residue() < 1e-15);
}

TEST_CASE("dimension mismatch is rejected") {
    ModelParams p;
    p.n_cut = 5;
    CHECK_THROWS_AS(apply_rhs(p, DensityMatrix::vacuum(4)), DimensionError);
    p.n_cut = 1;
    CHECK_THROWS_AS(p.validate(), DimensionError);
}
