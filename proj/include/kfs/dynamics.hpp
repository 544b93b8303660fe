#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfs/fock.hpp"
#include "kfs/params.hpp"

namespace kfs {

struct EvolutionConfig {
    double dt = 1e-3;          ///< step in units of 1/gamma
    double t_max = 50.0;       ///< horizon
    int record_every = 100;    ///< sampling stride in steps
    double ss_tol = 1e-8;      ///< stop once ||d(rho)/dt||_F drops below this
    double tail_tol = 1e-4;    ///< max population in the top 10% of Fock levels
    bool store_snapshots = false;
    bool record_negativity = false;  ///< Wigner negativity at each sample (costly)
    bool record_min_eigenvalue = false;
    bool stop_at_steady_state = true;

    void validate() const;
};

/// Observables sampled along an evolution.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> mean_n;
    std::vector<cplx> mean_a;
    std::vector<double> purity;
    std::vector<double> negativity;       ///< empty unless requested
    std::vector<double> wigner_norm;      ///< integral of W per sample, alongside negativity
    std::vector<double> trace_error;      ///< |Tr rho - 1|
    std::vector<double> hermiticity;      ///< max |rho - rho^dagger|
    std::vector<double> min_eigenvalue;   ///< empty unless requested
    std::vector<double> tail_mass;
    std::vector<DensityMatrix> snapshots; ///< empty unless requested

    std::size_t size() const { return times.size(); }
};

struct EvolutionResult {
    TimeSeries series;
    DensityMatrix final_state;
    double t_final = 0.0;
    bool reached_steady_state = false;
    double final_derivative_norm = 0.0;
    double max_step_error = 0.0;  ///< step-halving local error estimate (max over samples)
};

/// Fixed-step classic RK4 from rho0. Stops at t_max or once the generator
/// norm drops below ss_tol. Throws DivergenceError on blow-up (naming dt)
/// or trace drift beyond 1e-6, CutoffTooSmallError on tail-mass breach.
EvolutionResult evolve(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& config = {});

enum class SteadyMethod { direct, evolved };

struct SteadyStateResult {
    DensityMatrix rho;
    double residual = 0.0;  ///< ||L vec(rho)||_2
    SteadyMethod method = SteadyMethod::direct;
    bool converged = false;
    double tail_mass = 0.0;
    double hermitization_correction = 0.0;
    double min_eigenvalue = 0.0;
    bool positivity_ok = true;  ///< min eigenvalue >= -1e-6
};

struct DirectSolveOptions {
    int max_dim = kDefaultLiouvillianMaxDim;
    double ss_tol = 1e-8;
};

/// Solves L vec(rho) = 0 with the (0,0) equation replaced by Tr rho = 1.
/// Throws DegenerateSteadyStateError when the constrained system is singular
/// or the solution is not a bounded density matrix.
SteadyStateResult solve_steady_direct(const ModelParams& params, const DirectSolveOptions& options = {});

/// Evolves until the steady-state criterion; reports method = evolved.
SteadyStateResult solve_steady_evolved(const ModelParams& params, const EvolutionConfig& config,
                                       const std::optional<DensityMatrix>& rho0 = std::nullopt);

/// ||L vec(rho)||_2 computed through the generator.
double steady_residual(const ModelParams& params, const DensityMatrix& rho);

struct Observables {
    double mean_n = 0.0;
    cplx mean_a{};
    double purity = 0.0;
    double tail_mass = 0.0;
};

Observables observables(const DensityMatrix& rho);

std::string to_string(SteadyMethod m);

}  // namespace kfs
