#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace kfs {

/// On/off switches for the individual generator terms. All on by default.
///
/// `hamiltonian` gates the whole coherent part i[H, rho] (and the detuning
/// term on its own); `pump` and `kerr` additionally gate their pieces of H.
struct TermToggles {
    bool hamiltonian = true;
    bool pump = true;
    bool kerr = true;
    bool lindblad = true;
    bool dephasing = true;
    bool feedback_drift = true;

    static TermToggles none() { return {false, false, false, false, false, false}; }
    bool operator==(const TermToggles&) const = default;
};

/// Physical parameters of the feedback master equation. Rates are in units
/// of the cavity decay rate gamma (gamma == 1); theta is in radians.
struct ModelParams {
    double u = 0.0;      ///< Kerr strength U / (hbar gamma)
    double delta = 0.0;  ///< detuning Delta / gamma
    double amp = 0.0;    ///< pump amplitude A / gamma
    double theta = 0.0;  ///< pump phase [rad]
    double lam = 0.0;    ///< feedback coefficient lambda / gamma
    double eta = 1.0;    ///< effective detection efficiency, (0, 1]
    int n_cut = 100;     ///< Fock cutoff = Hilbert space dimension
    TermToggles terms{};

    /// Throws ConfigError / DimensionError on invalid values.
    void validate() const;

    /// lambda^2 / (2 eta), zero when the dephasing term is off or lambda == 0.
    double dephasing_rate() const;

    bool operator==(const ModelParams&) const = default;
};

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Scalar fields addressable by name in sweeps and configs. Angles are
/// addressed in degrees ("theta_deg").
const std::vector<std::string>& scalar_param_names();
bool is_scalar_param(std::string_view name);
void set_scalar_param(ModelParams& p, std::string_view name, double value);
double get_scalar_param(const ModelParams& p, std::string_view name);

}  // namespace kfs
