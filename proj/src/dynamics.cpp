#include "kfs/dynamics.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "kfs/errors.hpp"
#include "kfs/wigner.hpp"

namespace kfs {

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("evolution dt must be > 0");
    if (!(t_max >= dt)) throw ConfigError("evolution t_max must be >= dt");
    if (!(ss_tol > 0.0)) throw ConfigError("evolution ss_tol must be > 0");
    if (record_every < 1) throw ConfigError("evolution record_every must be >= 1");
    if (!(tail_tol > 0.0)) throw ConfigError("evolution tail_tol must be > 0");
}

std::string to_string(SteadyMethod m) { return m == SteadyMethod::direct ? "direct" : "evolved"; }

Observables observables(const DensityMatrix& rho) {
    const int dim = rho.dim();
    const ComplexMatrix& r = rho.entries();
    Observables o;
    cplx n_acc{};
    for (int n = 0; n < dim; ++n) n_acc += static_cast<double>(n) * r(n, n);
    o.mean_n = n_acc.real();
    for (int n = 1; n < dim; ++n) o.mean_a += std::sqrt(static_cast<double>(n)) * r(n, n - 1);
    // Tr(rho^2) = sum_nm rho_nm rho_mn
    o.purity = (r.cwiseProduct(r.transpose())).sum().real();
    o.tail_mass = tail_mass(rho);
    return o;
}

namespace {

// RK4 amplification factor for a scalar mode z = dt * lambda.
double rk4_gain(cplx z) {
    return std::abs(1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0);
}

void preflight_stability(const RhsEvaluator& f, const ModelParams& p, double dt) {
    const int dim = p.n_cut;
    const TermToggles& t = p.terms;
    const double det = t.hamiltonian ? p.delta : 0.0;
    const double kerr = (t.hamiltonian && t.kerr) ? 0.5 * p.u : 0.0;
    const double loss = t.lindblad ? 0.5 : 0.0;
    const double kappa = p.dephasing_rate();
    double worst = 0.0;
    for (int n = 0; n < dim; ++n) {
        for (int m = 0; m < dim; ++m) {
            const double diff = n - m;
            const double h = det * diff + kerr * (n * (n - 1.0) - m * (m - 1.0));
            const cplx rate(-loss * (n + m) - kappa * diff * diff, h);
            worst = std::max(worst, rk4_gain(dt * rate));
        }
    }
    if (worst > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "dt=" << dt << " is outside the RK4 stability region for n_cut=" << dim
            << " (max diagonal rate " << f.max_diagonal_rate() << ", amplification " << worst
            << "); reduce dt below about " << 2.5 / f.max_diagonal_rate();
        throw DivergenceError(msg.str());
    }
}

struct Rk4Stepper {
    const RhsEvaluator& f;
    ComplexMatrix k1, k2, k3, k4, tmp;

    explicit Rk4Stepper(const RhsEvaluator& fn)
        : f(fn), k1(fn.dim(), fn.dim()), k2(fn.dim(), fn.dim()), k3(fn.dim(), fn.dim()),
          k4(fn.dim(), fn.dim()), tmp(fn.dim(), fn.dim()) {}

    // Advances rho by h. When k1_ready, k1 already holds f(rho).
    void step(ComplexMatrix& rho, double h, bool k1_ready) {
        if (!k1_ready) f(rho, k1);
        tmp = rho + (0.5 * h) * k1;
        f(tmp, k2);
        tmp = rho + (0.5 * h) * k2;
        f(tmp, k3);
        tmp = rho + h * k3;
        f(tmp, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

void record_sample(TimeSeries& ts, double t, const DensityMatrix& rho, const EvolutionConfig& cfg) {
    const Observables o = observables(rho);
    ts.times.push_back(t);
    ts.mean_n.push_back(o.mean_n);
    ts.mean_a.push_back(o.mean_a);
    ts.purity.push_back(o.purity);
    ts.tail_mass.push_back(o.tail_mass);
    ts.trace_error.push_back(std::abs(rho.trace() - 1.0));
    ts.hermiticity.push_back(rho.hermiticity_residue());
    if (cfg.record_min_eigenvalue) ts.min_eigenvalue.push_back(rho.min_eigenvalue());
    if (cfg.record_negativity) {
        NegativityOptions opt;
        opt.refine = false;
        const NegativityReport rep = negativity_of_state(rho, true, opt);
        ts.negativity.push_back(rep.value);
        ts.wigner_norm.push_back(rep.normalization);
    }
    if (cfg.store_snapshots) ts.snapshots.push_back(rho);
}

}  // namespace

EvolutionResult evolve(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& config) {
    params.validate();
    config.validate();
    if (rho0.dim() != params.n_cut) {
        throw DimensionError("evolve: initial state dimension " + std::to_string(rho0.dim()) +
                             " does not match n_cut " + std::to_string(params.n_cut));
    }
    const RhsEvaluator f(params);
    preflight_stability(f, params, config.dt);

    const double dt = config.dt;
    const long steps = std::lround(config.t_max / dt);
    Rk4Stepper stepper(f);
    ComplexMatrix rho = rho0.entries();
    ComplexMatrix probe_full, probe_half;

    EvolutionResult res;
    double t = 0.0;

    const auto check_state = [&](long step) {
        const double biggest = rho.cwiseAbs().maxCoeff();
        if (!std::isfinite(biggest) || biggest > 1e3) {
            std::ostringstream msg;
            msg << "integration diverged at t=" << step * dt << " with dt=" << dt << " (max |rho_nm| = " << biggest
                << ")";
            throw DivergenceError(msg.str());
        }
        const double drift = std::abs(rho.trace() - 1.0);
        if (drift > 1e-6) {
            std::ostringstream msg;
            msg << "trace drifted by " << drift << " at t=" << step * dt << " with dt=" << dt;
            throw DivergenceError(msg.str());
        }
        const double tail = tail_mass(DensityMatrix(rho));
        if (tail > config.tail_tol) {
            std::ostringstream msg;
            msg << "tail mass " << tail << " in the top 10% of Fock levels exceeds " << config.tail_tol << " at t="
                << step * dt << "; increase n_cut (currently " << params.n_cut << ")";
            throw CutoffTooSmallError(msg.str());
        }
    };

    // Local error from one full step vs two half steps (Richardson, p = 4).
    const auto estimate_step_error = [&]() {
        probe_full = rho;
        stepper.step(probe_full, dt, false);
        probe_half = rho;
        stepper.step(probe_half, 0.5 * dt, false);
        stepper.step(probe_half, 0.5 * dt, false);
        return (probe_full - probe_half).cwiseAbs().maxCoeff() / 15.0;
    };

    check_state(0);
    record_sample(res.series, 0.0, DensityMatrix(rho), config);
    long step = 0;
    bool steady = false;
    double deriv_norm = 0.0;
    while (step < steps) {
        f(rho, stepper.k1);
        deriv_norm = stepper.k1.norm();
        if (config.stop_at_steady_state && deriv_norm < config.ss_tol) {
            steady = true;
            break;
        }
        stepper.step(rho, dt, true);
        ++step;
        t = step * dt;
        const bool sample = (step % config.record_every == 0);
        if (sample || step % 50 == 0) check_state(step);
        if (sample && step < steps) {
            res.max_step_error = std::max(res.max_step_error, estimate_step_error());
            record_sample(res.series, t, DensityMatrix(rho), config);
        }
    }
    if (!steady) {
        f(rho, stepper.k1);
        deriv_norm = stepper.k1.norm();
        steady = deriv_norm < config.ss_tol;
    }
    check_state(step);
    if (res.series.times.back() != t) record_sample(res.series, t, DensityMatrix(rho), config);

    res.final_state = DensityMatrix(rho);
    res.t_final = t;
    res.reached_steady_state = steady;
    res.final_derivative_norm = deriv_norm;
    return res;
}

double steady_residual(const ModelParams& params, const DensityMatrix& rho) {
    return apply_rhs(params, rho).norm();
}

SteadyStateResult solve_steady_direct(const ModelParams& params, const DirectSolveOptions& options) {
    const SparseComplex l = build_liouvillian(params, options.max_dim);
    const int dim = params.n_cut;
    const Eigen::Index size = l.rows();

    // Replace the (0,0) equation (row 0) with the trace functional.
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(l.nonZeros()) + dim);
    for (Eigen::Index col = 0; col < l.outerSize(); ++col) {
        for (SparseComplex::InnerIterator it(l, col); it; ++it) {
            if (it.row() != 0) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (int k = 0; k < dim; ++k) trip.emplace_back(0, k + k * dim, cplx(1.0, 0.0));
    SparseComplex a(size, size);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(size);
    b(0) = 1.0;

    Eigen::SparseLU<SparseComplex, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw DegenerateSteadyStateError("steady-state system is singular (" + lu.lastErrorMessage() +
                                         "); the stationary state is not unique for these parameters");
    }
    const Eigen::VectorXcd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw DegenerateSteadyStateError("steady-state solve failed to produce a finite solution");
    }
    const double biggest = x.cwiseAbs().maxCoeff();
    if (biggest > 1.0 + 1e-6) {
        std::ostringstream msg;
        msg << "steady-state solution is not a bounded density matrix (max |rho_nm| = " << biggest
            << "); system is ill-conditioned or degenerate";
        throw DegenerateSteadyStateError(msg.str());
    }

    SteadyStateResult res;
    res.method = SteadyMethod::direct;
    res.rho = DensityMatrix(unvectorize(x, dim));
    res.hermitization_correction = res.rho.hermitize();
    res.residual = (l * vectorize(res.rho.entries())).norm();
    res.converged = res.residual < options.ss_tol;
    res.tail_mass = tail_mass(res.rho);
    res.min_eigenvalue = res.rho.min_eigenvalue();
    res.positivity_ok = res.min_eigenvalue >= -1e-6;
    return res;
}

SteadyStateResult solve_steady_evolved(const ModelParams& params, const EvolutionConfig& config,
                                       const std::optional<DensityMatrix>& rho0) {
    const DensityMatrix start = rho0 ? *rho0 : DensityMatrix::vacuum(params.n_cut);
    EvolutionConfig cfg = config;
    cfg.stop_at_steady_state = true;
    const EvolutionResult ev = evolve(start, params, cfg);

    SteadyStateResult res;
    res.method = SteadyMethod::evolved;
    res.rho = ev.final_state;
    res.hermitization_correction = res.rho.hermitize();
    res.residual = steady_residual(params, res.rho);
    res.converged = ev.reached_steady_state && res.residual < config.ss_tol;
    res.tail_mass = tail_mass(res.rho);
    res.min_eigenvalue = res.rho.min_eigenvalue();
    res.positivity_ok = res.min_eigenvalue >= -1e-6;
    return res;
}

}  // namespace kfs
