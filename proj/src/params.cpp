#include "kfs/params.hpp"

#include <cmath>

#include "kfs/errors.hpp"

namespace kfs {

void ModelParams::validate() const {
    if (n_cut < 2) {
        throw DimensionError("n_cut must be >= 2, got " + std::to_string(n_cut));
    }
    const std::pair<const char*, double> rates[] = {
        {"u", u}, {"delta", delta}, {"amp", amp}, {"theta", theta}, {"lam", lam}, {"eta", eta}};
    for (const auto& [name, v] : rates) {
        if (!std::isfinite(v)) throw ConfigError(std::string("parameter '") + name + "' is not finite");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw ConfigError("eta must lie in (0, 1], got " + std::to_string(eta));
    }
}

double ModelParams::dephasing_rate() const {
    if (!terms.dephasing || lam == 0.0) return 0.0;
    return lam * lam / (2.0 * eta);
}

const std::vector<std::string>& scalar_param_names() {
    static const std::vector<std::string> names = {"u", "delta", "amp", "theta_deg", "lam", "eta", "n_cut"};
    return names;
}

bool is_scalar_param(std::string_view name) {
    for (const auto& n : scalar_param_names()) {
        if (n == name) return true;
    }
    return false;
}

void set_scalar_param(ModelParams& p, std::string_view name, double value) {
    if (name == "u") p.u = value;
    else if (name == "delta") p.delta = value;
    else if (name == "amp") p.amp = value;
    else if (name == "theta_deg") p.theta = deg_to_rad(value);
    else if (name == "lam") p.lam = value;
    else if (name == "eta") p.eta = value;
    else if (name == "n_cut") {
        if (value != std::floor(value)) throw ConfigError("n_cut must be an integer");
        p.n_cut = static_cast<int>(value);
    } else {
        throw ConfigError("unknown model parameter '" + std::string(name) + "'");
    }
}

double get_scalar_param(const ModelParams& p, std::string_view name) {
    if (name == "u") return p.u;
    if (name == "delta") return p.delta;
    if (name == "amp") return p.amp;
    if (name == "theta_deg") return rad_to_deg(p.theta);
    if (name == "lam") return p.lam;
    if (name == "eta") return p.eta;
    if (name == "n_cut") return p.n_cut;
    throw ConfigError("unknown model parameter '" + std::string(name) + "'");
}

}  // namespace kfs
