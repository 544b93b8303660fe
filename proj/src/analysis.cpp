#include "kfs/analysis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kfs/errors.hpp"

namespace kfs {

cplx coherent_steady_amplitude(const ModelParams& params) {
    if (params.u != 0.0 || params.lam != 0.0) {
        throw NotApplicableError("coherent steady amplitude only applies for U = 0 and lambda = 0");
    }
    return cplx(0.0, 2.0 * params.amp) * std::polar(1.0, params.theta);
}

DensityMatrix dephased_mixture(double alpha_mag, int n_cut) {
    if (!(alpha_mag >= 0.0) || !std::isfinite(alpha_mag)) throw ConfigError("alpha_mag must be >= 0");
    if (n_cut < 1) throw DimensionError("n_cut must be positive");
    const double mean = alpha_mag * alpha_mag;
    ComplexMatrix rho = ComplexMatrix::Zero(n_cut, n_cut);
    double kept = 0.0;
    for (int n = 0; n < n_cut; ++n) {
        const double w = (mean == 0.0) ? (n == 0 ? 1.0 : 0.0)
                                       : std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
        rho(n, n) = w;
        kept += w;
    }
    if (1.0 - kept > 1e-6) {
        std::ostringstream msg;
        msg << "n_cut=" << n_cut << " keeps only " << kept << " of the Poisson mass for |alpha|=" << alpha_mag;
        throw CutoffTooSmallError(msg.str());
    }
    rho /= kept;
    return DensityMatrix(std::move(rho));
}

double effective_eta(double eta0, double reflectance) {
    if (!(eta0 > 0.0 && eta0 <= 1.0)) throw ConfigError("eta0 must lie in (0, 1]");
    if (!(reflectance >= 0.0 && reflectance <= 1.0)) throw ConfigError("reflectance must lie in [0, 1]");
    return eta0 * reflectance;
}

void PolaritonParams::validate() const {
    if (!(bohr_radius > 0.0) || !(permittivity > 0.0) || !(trap_area > 0.0)) {
        throw ConfigError("polariton parameters must be positive");
    }
    if (!(hopfield_x >= 0.0 && hopfield_x <= 1.0)) throw ConfigError("Hopfield coefficient must lie in [0, 1]");
}

double estimate_interaction(const PolaritonParams& p) {
    p.validate();
    using namespace constants;
    const double a_b = p.bohr_radius * 1e-9;
    const double area = p.trap_area * 1e-12;
    const double eps = p.permittivity * vacuum_permittivity;
    const double x4 = std::pow(p.hopfield_x, 4);
    const double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
    const double joules = 30.0 * elementary_charge * elementary_charge * a_b * x4 / (pi3 * eps * area);
    return joules / elementary_charge * 1e6;
}

}  // namespace kfs
