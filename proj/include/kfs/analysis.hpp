#pragma once

#include <complex>

#include "kfs/fock.hpp"
#include "kfs/params.hpp"

namespace kfs {

/// CODATA 2018 values used by the interaction estimate.
namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;  // C (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double hbar = 1.054571817e-34;  // J s (exact)
}  // namespace constants

/// Steady-state amplitude of the linear (U = lambda = 0) cavity,
/// alpha = 2 i A e^{i theta} / gamma, in the frame rotating at Delta.
/// Throws NotApplicableError when U or lambda is non-zero.
cplx coherent_steady_amplitude(const ModelParams& params);

/// Fully phase-diffused coherent state: diagonal Poisson weights
/// e^{-|a|^2} |a|^{2n} / n!, renormalized over the cutoff. Throws
/// CutoffTooSmallError when more than 1e-6 of the mass lies beyond n_cut.
DensityMatrix dephased_mixture(double alpha_mag, int n_cut);

/// eta = eta0 * r; eta0 in (0, 1], r in [0, 1].
double effective_eta(double eta0, double reflectance);

/// Inputs in lab units: bohr_radius [nm], trap_area [um^2], permittivity
/// relative to epsilon_0.
struct PolaritonParams {
    double bohr_radius = 10.0;
    double hopfield_x = 0.70710678118654752;
    double permittivity = 13.0;
    double trap_area = 0.78539816339744831;  // 1 um diameter spot

    void validate() const;
};

/// U = 30 e^2 a_B |X|^4 / (pi^3 epsilon A), returned in micro-eV.
double estimate_interaction(const PolaritonParams& p);

}  // namespace kfs
