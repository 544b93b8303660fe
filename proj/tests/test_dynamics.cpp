#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "kfs/analysis.hpp"
#include "kfs/dynamics.hpp"
#include "kfs/errors.hpp"
#include "test_util.hpp"

using namespace kfs;

namespace {

ModelParams linear_cavity(int n_cut) {
    ModelParams p;
    p.amp = 1.0;
    p.n_cut = n_cut;
    return p;
}

}  // namespace

TEST_CASE("observables") {
    const Observables o2 = observables(DensityMatrix::fock(2, 5));
    CHECK(o2.mean_n == doctest::Approx(2.0));
    CHECK(o2.purity == doctest::Approx(1.0));
    ComplexMatrix half = ComplexMatrix::Zero(3, 3);
    half(0, 0) = half(1, 1) = 0.5;
    CHECK(observables(DensityMatrix(half)).purity == doctest::Approx(0.5));
    CHECK(observables(dephased_mixture(2.0, 40)).mean_n == doctest::Approx(4.0).epsilon(1e-9));
    const Observables oc = observables(DensityMatrix::coherent(cplx(0.5, -1.0), 30));
    CHECK(std::abs(oc.mean_a - cplx(0.5, -1.0)) < 1e-10);
}

TEST_CASE("linear cavity relaxes to the coherent amplitude") {
    EvolutionConfig cfg;
    cfg.t_max = 20.0;
    const EvolutionResult r = evolve(DensityMatrix::vacuum(30), linear_cavity(30), cfg);
    const Observables o = observables(r.final_state);
    CHECK(std::abs(o.mean_n - 4.0) < 1e-3);
    CHECK(std::abs(o.mean_a - cplx(0, 2)) < 1e-3);
    CHECK(r.max_step_error < 1e-10);
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        CHECK(r.series.trace_error[k] < 1e-10);
        CHECK(r.series.hermiticity[k] < 1e-12);
    }
}

TEST_CASE("amplitude follows the closed-form transient with detuning") {
    ModelParams p = linear_cavity(30);
    p.delta = 0.7;
    p.theta = 0.3;
    EvolutionConfig cfg;
    cfg.t_max = 5.0;
    cfg.record_every = 250;
    const EvolutionResult r = evolve(DensityMatrix::vacuum(30), p, cfg);
    // d<a>/dt = (i Delta - 1/2) <a> + i A e^{i theta}, <a>(0) = 0
    const cplx rate(-0.5, 0.7);
    const cplx drive = cplx(0, 1) * std::exp(cplx(0, 0.3));
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        const double t = r.series.times[k];
        const cplx expected = -drive / rate * (1.0 - std::exp(rate * t));
        CHECK(std::abs(r.series.mean_a[k] - expected) < 1e-9);
    }
}

TEST_CASE("pure dephasing of a two-level coherence") {
    ModelParams p;
    p.n_cut = 4;
    p.lam = 1.0;
    p.terms = TermToggles::none();
    p.terms.dephasing = true;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi(0) = psi(1) = 1.0;
    EvolutionConfig cfg;
    cfg.t_max = 3.0;
    cfg.record_every = 500;
    cfg.store_snapshots = true;
    const EvolutionResult r = evolve(DensityMatrix::pure(psi), p, cfg);
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        const cplx rho01 = r.series.snapshots[k](0, 1);
        CHECK(std::abs(rho01 - 0.5 * std::exp(-r.series.times[k] / 2.0)) < 1e-12);
    }
}

TEST_CASE("halving dt barely moves the final state") {
    std::mt19937_64 rng(2);
    ModelParams p = test::random_params(20, rng);
    p.amp = 0.8;
    EvolutionConfig a, b;
    a.t_max = b.t_max = 2.0;
    a.stop_at_steady_state = b.stop_at_steady_state = false;
    b.dt = a.dt / 2;
    const DensityMatrix start = DensityMatrix::vacuum(20);
    CHECK(trace_distance(evolve(start, p, a).final_state, evolve(start, p, b).final_state) < 1e-6);
}

TEST_CASE("evolution guards") {
    ModelParams p;
    p.amp = 3.0;
    p.lam = 0.8;
    p.u = 0.3;
    p.n_cut = 60;
    EvolutionConfig cfg;
    cfg.dt = 0.05;
    try {
        evolve(DensityMatrix::vacuum(60), p, cfg);
        FAIL("expected a divergence error");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("dt=0.05") != std::string::npos);
    }

    ModelParams small = linear_cavity(10);
    small.amp = 3.0;
    CHECK_THROWS_AS(evolve(DensityMatrix::vacuum(10), small, {}), CutoffTooSmallError);
    CHECK_THROWS_AS(evolve(DensityMatrix::vacuum(9), small, {}), DimensionError);

    EvolutionConfig bad;
    bad.dt = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("direct solver") {
    const SteadyStateResult c = solve_steady_direct(linear_cavity(30));
    CHECK(c.converged);
    CHECK(coherent_fidelity(c.rho, coherent_steady_amplitude(linear_cavity(30))) > 0.999);
    CHECK(c.rho.diagnostics().ok());

    ModelParams empty;
    empty.u = 0.4;
    empty.delta = 1.3;
    empty.n_cut = 12;
    const SteadyStateResult v = solve_steady_direct(empty);
    CHECK(std::abs(v.rho(0, 0) - 1.0) < 1e-9);

    // no dissipation: every diagonal state is stationary
    ModelParams closed;
    closed.n_cut = 6;
    closed.terms = TermToggles::none();
    CHECK_THROWS_AS(solve_steady_direct(closed), DegenerateSteadyStateError);

    ModelParams big = linear_cavity(140);
    CHECK_THROWS_AS(solve_steady_direct(big), ResourceError);
}

TEST_CASE("direct and evolved steady states agree") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    EvolutionConfig cfg;
    cfg.t_max = 200.0;
    cfg.record_every = 1000;
    for (int trial = 0; trial < 3; ++trial) {
        ModelParams p;
        p.n_cut = 30;
        p.lam = unit(rng);
        p.u = unit(rng);
        p.amp = unit(rng);
        p.theta = 6.0 * unit(rng);
        const SteadyStateResult d = solve_steady_direct(p);
        const SteadyStateResult e = solve_steady_evolved(p, cfg, test::random_state(30, rng, 4));
        CHECK(e.converged);
        CHECK(trace_distance(d.rho, e.rho) < 1e-5);
    }
}

TEST_CASE("strong feedback case: evolution endpoint matches the direct solve") {
    ModelParams p;
    p.lam = 0.65;
    p.u = 0.5;
    p.amp = 3.0;
    p.theta = deg_to_rad(-5.0);
    p.n_cut = 50;
    EvolutionConfig cfg;
    cfg.t_max = 200.0;
    cfg.record_every = 2000;
    const SteadyStateResult d = solve_steady_direct(p);
    const SteadyStateResult e = solve_steady_evolved(p, cfg);
    CHECK(e.converged);
    CHECK(trace_distance(d.rho, e.rho) < 1e-6);
    CHECK(d.positivity_ok);
    CHECK(d.hermitization_correction < 1e-10);
}
