#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "kfs/errors.hpp"
#include "kfs/wigner.hpp"
#include "test_util.hpp"

using namespace kfs;

namespace {

constexpr double two_over_pi = 2.0 / std::numbers::pi;

double factorial(int k) { return std::tgamma(k + 1.0); }
double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// W = (2/pi) e^{2|a|^2} sum rho_nm (-1/2)^{n+m} / sqrt(n! m!) d^n_a d^m_{a*} e^{-4 a a*},
// with the derivatives taken in closed form.
double derivative_oracle(const DensityMatrix& rho, cplx alpha) {
    const cplx ac = std::conj(alpha);
    const double r2 = std::norm(alpha);
    cplx sum = 0.0;
    for (int n = 0; n < rho.dim(); ++n) {
        for (int m = 0; m < rho.dim(); ++m) {
            // d^m_{a*} e = (-4a)^m e; then Leibniz over d^n_a.
            cplx deriv = 0.0;
            for (int k = 0; k <= std::min(n, m); ++k) {
                deriv += binom(n, k) * std::pow(-4.0, m) * factorial(m) / factorial(m - k) * std::pow(alpha, m - k) *
                         std::pow(-4.0 * ac, n - k);
            }
            sum += rho(n, m) * std::pow(-0.5, n + m) / std::sqrt(factorial(n) * factorial(m)) * deriv;
        }
    }
    return (two_over_pi * std::exp(2.0 * r2) * std::exp(-4.0 * r2) * sum).real();
}

// W(b) = (2/pi) Tr[D(b)^dag rho D(b) parity], with the displacement built by
// matrix exponential in an enlarged space.
double displaced_parity_oracle(const DensityMatrix& rho, cplx beta, int big = 70) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big, big);
    for (int n = 1; n < big; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXcd gen = beta * a.adjoint() - std::conj(beta) * a;
    const Eigen::MatrixXcd D = gen.exp();
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(big, big);
    r.topLeftCorner(rho.dim(), rho.dim()) = rho.entries();
    const Eigen::MatrixXcd shifted = D.adjoint() * r * D;
    double w = 0.0;
    for (int k = 0; k < big; ++k) w += (k % 2 == 0 ? 1.0 : -1.0) * shifted(k, k).real();
    return two_over_pi * w;
}

}  // namespace

TEST_CASE("matches the closed-form derivative expansion at small cutoff") {
    std::mt19937_64 rng(99);
    const cplx points[] = {{0, 0}, {0.3, 0}, {0, -0.4}, {0.5, 0.5}, {-0.7, 0.2},
                           {1.1, -0.6}, {-1.3, -1.0}, {0.05, 1.5}, {2.0, 0.1}};
    for (int trial = 0; trial < 25; ++trial) {
        const int dim = 2 + trial % 3;
        const DensityMatrix rho = test::random_state(dim, rng);
        const WignerEvaluator ev(rho);
        for (cplx a : points) CHECK(std::abs(ev(a) - derivative_oracle(rho, a)) < 1e-10);
    }
}

TEST_CASE("matches the displaced-parity trace") {
    std::mt19937_64 rng(5);
    for (int dim : {6, 12}) {
        const DensityMatrix rho = test::random_state(dim, rng);
        for (cplx a : {cplx(0.2, -0.3), cplx(1.4, 0.9), cplx(-2.2, 0.5)}) {
            CHECK(std::abs(wigner_at(rho, a) - displaced_parity_oracle(rho, a)) < 1e-9);
        }
    }
}

TEST_CASE("Fock states at the origin") {
    for (int n = 0; n <= 5; ++n) {
        CHECK(std::abs(wigner_at(DensityMatrix::fock(n, 8), 0.0) - two_over_pi * (n % 2 == 0 ? 1 : -1)) < 1e-12);
    }
    // deep in the ladder the recurrences stay bounded
    const DensityMatrix deep = DensityMatrix::fock(99, 100);
    CHECK(std::abs(wigner_at(deep, 0.0) + two_over_pi) < 1e-8);
    CHECK(std::abs(wigner_at(deep, cplx(3.0, 2.0))) <= two_over_pi);
}

TEST_CASE("coherent state peaks at its amplitude") {
    const cplx beta(1.2, -0.8);
    const DensityMatrix rho = DensityMatrix::coherent(beta, 40);
    CHECK(wigner_at(rho, beta) == doctest::Approx(two_over_pi).epsilon(1e-9));
    const cplx off = beta + cplx(0.5, 0.0);
    CHECK(wigner_at(rho, off) == doctest::Approx(two_over_pi * std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("single-photon negativity") {
    const NegativityReport r = negativity_of_state(DensityMatrix::fock(1, 6));
    CHECK(r.value == doctest::Approx(2.0 * std::exp(-0.5) - 1.0).epsilon(1e-3));
    CHECK(std::abs(r.normalization - 1.0) < 1e-3);
    CHECK(r.refinement_ok);
}

TEST_CASE("classical states have no negativity") {
    for (const DensityMatrix& rho : {DensityMatrix::vacuum(10), DensityMatrix::coherent(cplx(0, 2), 40)}) {
        const NegativityReport r = negativity_of_state(rho);
        CHECK(r.value < 1e-12);
        CHECK(std::abs(r.normalization - 1.0) < 1e-3);
    }
}

TEST_CASE("phase rotation rotates the field") {
    std::mt19937_64 rng(17);
    const int dim = 10;
    const DensityMatrix rho = test::random_state(dim, rng);
    const double phi = 0.83;
    Eigen::VectorXcd u(dim);
    for (int n = 0; n < dim; ++n) u(n) = std::exp(cplx(0, -phi * n));
    const DensityMatrix rotated(u.asDiagonal() * rho.entries() * u.conjugate().asDiagonal());
    for (cplx a : {cplx(0.4, 0.1), cplx(-1.0, 0.7), cplx(0.0, -1.6)}) {
        CHECK(wigner_at(rotated, a) == doctest::Approx(wigner_at(rho, a * std::exp(cplx(0, phi)))).epsilon(1e-11));
    }
}

TEST_CASE("grid transform: threads, normalization and guards") {
    std::mt19937_64 rng(23);
    const DensityMatrix rho = test::random_state(8, rng);
    PhaseSpaceGrid g{-6, 6, -6, 6, 64, 48};
    WignerOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const WignerField a = wigner_transform(rho, g, one);
    const WignerField b = wigner_transform(rho, g, four);
    CHECK(a.values == b.values);
    CHECK(a.integral() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(a.at(10, 20) == doctest::Approx(wigner_at(rho, cplx(g.x(10), g.p(20)))).epsilon(1e-12));

    const DensityMatrix far = DensityMatrix::coherent(cplx(4.0, 0.0), 60);
    const PhaseSpaceGrid small{-2, 2, -2, 2, 32, 32};
    CHECK_THROWS_AS(negativity(wigner_transform(far, small)), GridTooSmallError);

    CHECK_THROWS_AS((PhaseSpaceGrid{1, -1, -1, 1, 32, 32}.validate()), ConfigError);
    CHECK_THROWS_AS((PhaseSpaceGrid{-1, 1, -1, 1, 8, 32}.validate()), ConfigError);
}

TEST_CASE("large cutoff field stays normalized") {
    const DensityMatrix rho = DensityMatrix::fock(60, 100);
    const NegativityReport r = negativity_of_state(rho, true, {.refine = false});
    CHECK(std::abs(r.normalization - 1.0) < 1e-3);
    CHECK(r.value > 0.1);
}

TEST_CASE("non-hermitian input reports an imaginary residue") {
    ComplexMatrix m = DensityMatrix::fock(1, 4).entries();
    m(0, 1) = cplx(0.1, 0);
    CHECK(WignerEvaluator(DensityMatrix(m)).imag_residue_bound() > 0.0);
    CHECK(WignerEvaluator(DensityMatrix::fock(1, 4)).imag_residue_bound() == 0.0);
}

TEST_CASE("single photon on a fixed 400 x 400 grid") {
    const PhaseSpaceGrid g{-6, 6, -6, 6, 400, 400};
    CHECK(negativity(wigner_transform(DensityMatrix::fock(1, 4), g)) ==
          doctest::Approx(2.0 * std::exp(-0.5) - 1.0).epsilon(1e-3));
}

TEST_CASE("coherent state agrees with the derivative expansion") {
    const DensityMatrix big = DensityMatrix::coherent(cplx(1.0, 0.0), 40);
    const DensityMatrix small = DensityMatrix::coherent(cplx(1.0, 0.0), 10);
    CHECK(std::abs(wigner_at(big, 1.0) - two_over_pi) < 1e-4);
    for (cplx a : {cplx(1.0, 0.0), cplx(0.5, 0.3), cplx(1.6, -0.4)}) {
        CHECK(std::abs(wigner_at(small, a) - derivative_oracle(small, a)) < 1e-9);
    }
}

TEST_CASE("auto grids normalize random states with moderate photon number") {
    std::mt19937_64 rng(41);
    for (int support : {3, 8, 15}) {
        const DensityMatrix rho = test::random_state(30, rng, support);
        const NegativityReport r = negativity_of_state(rho, true, {.refine = false});
        CHECK(std::abs(r.normalization - 1.0) < 1e-3);
        const WignerField f = wigner_transform(rho, r.grid);
        CHECK(f.imag_residue < 1e-10);
    }
}

TEST_CASE("negativity is invariant under phase rotation") {
    std::mt19937_64 rng(43);
    const int dim = 12;
    const DensityMatrix rho = test::random_state(dim, rng, 6);
    Eigen::VectorXcd u(dim);
    for (int n = 0; n < dim; ++n) u(n) = std::exp(cplx(0, -1.1 * n));
    const DensityMatrix rotated(u.asDiagonal() * rho.entries() * u.conjugate().asDiagonal());
    const PhaseSpaceGrid g{-7, 7, -7, 7, 280, 280};
    CHECK(std::abs(negativity(wigner_transform(rho, g)) - negativity(wigner_transform(rotated, g))) < 1e-4);
}
