#include "kfs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kfs/errors.hpp"
#include "kfs/version.hpp"

namespace kfs::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw ConfigError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void check_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    check_object(j, where);
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

std::string key_path(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError("'" + key_path(where, key) + "' must be a number");
    return v.get<double>();
}

std::int64_t get_int(const json& j, const std::string& key, std::int64_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + key_path(where, key) + "' must be an integer");
    return v.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& key, bool fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError("'" + key_path(where, key) + "' must be true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError("'" + key_path(where, key) + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> parse_flat_array(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError("state file: '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(j.at(key).size());
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError("state file: '" + key + "' holds a non-number");
        out.push_back(v.get<double>());
    }
    return out;
}

/// Start/stop/step expansion, snapped to 12 significant digits so that
/// 0.1 + 2 * 0.05 prints as 0.2 rather than 0.20000000000000001.
std::vector<double> expand_range(double start, double stop, double step, const std::string& where) {
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
        throw ConfigError("'" + where + "' needs finite start <= stop and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", start + static_cast<double>(k) * step);
        values.push_back(std::strtod(buf, nullptr));
    }
    return values;
}

}  // namespace

// ---- states ---------------------------------------------------------------

json state_to_json(const DensityMatrix& rho) {
    const int d = rho.dim();
    std::vector<double> re, im;
    re.reserve(static_cast<std::size_t>(d) * d);
    im.reserve(static_cast<std::size_t>(d) * d);
    for (int n = 0; n < d; ++n) {
        for (int m = 0; m < d; ++m) {
            re.push_back(rho(n, m).real());
            im.push_back(rho(n, m).imag());
        }
    }
    return json{{"n_cut", d}, {"format", "dense-row-major"}, {"re", re}, {"im", im}};
}

DensityMatrix state_from_json(const json& j) {
    check_keys(j, {"n_cut", "format", "re", "im"}, "");
    if (get_string(j, "format", "", "") != "dense-row-major") {
        throw ConfigError("state file: 'format' must be \"dense-row-major\"");
    }
    const std::int64_t d = get_int(j, "n_cut", 0, "");
    if (d < 1 || d > 4096) throw ConfigError("state file: 'n_cut' out of range");
    const std::vector<double> re = parse_flat_array(j, "re");
    const std::vector<double> im = parse_flat_array(j, "im");
    const auto expected = static_cast<std::size_t>(d * d);
    if (re.size() != expected || im.size() != expected) {
        throw ConfigError("state file: expected " + std::to_string(expected) + " entries in 're' and 'im'");
    }
    ComplexMatrix m(d, d);
    for (std::int64_t n = 0; n < d; ++n) {
        for (std::int64_t k = 0; k < d; ++k) m(n, k) = {re[n * d + k], im[n * d + k]};
    }
    return DensityMatrix(std::move(m));
}

void write_state(const fs::path& path, const DensityMatrix& rho) {
    // Default serializer emits the shortest round-tripping representation.
    auto out = open_out(path);
    out << state_to_json(rho).dump() << '\n';
}

DensityMatrix read_state(const fs::path& path) { return state_from_json(read_json_file(path)); }

// ---- tabular outputs --------------------------------------------------------

void write_wigner_csv(const fs::path& path, const WignerField& field) {
    auto out = open_out(path);
    out << "x,p,w\n";
    const PhaseSpaceGrid& g = field.grid;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.np; ++j) {
            out << format_double(g.x(i)) << ',' << format_double(g.p(j)) << ',' << format_double(field.at(i, j)) << '\n';
        }
    }
}

void write_timeseries_csv(const fs::path& path, const TimeSeries& s) {
    auto out = open_out(path);
    out << "t,mean_n,re_a,im_a,purity,negativity\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double neg = k < s.negativity.size() ? s.negativity[k] : std::nan("");
        out << format_double(s.times[k]) << ',' << format_double(s.mean_n[k]) << ','
            << format_double(s.mean_a[k].real()) << ',' << format_double(s.mean_a[k].imag()) << ','
            << format_double(s.purity[k]) << ',' << format_double(neg) << '\n';
    }
}

// ---- run configuration ------------------------------------------------------

DensityMatrix InitialState::build(int n_cut) const {
    switch (kind) {
        case Kind::vacuum:
            return DensityMatrix::vacuum(n_cut);
        case Kind::fock:
            if (fock >= n_cut) throw ConfigError("initial Fock state exceeds the cutoff");
            return DensityMatrix::fock(fock, n_cut);
        case Kind::coherent:
            return DensityMatrix::coherent(alpha, n_cut);
        case Kind::file: {
            DensityMatrix rho = read_state(file);
            if (rho.dim() != n_cut) {
                throw ConfigError("initial state " + file.string() + " has n_cut " + std::to_string(rho.dim()) +
                                  ", model has " + std::to_string(n_cut));
            }
            return rho;
        }
    }
    return DensityMatrix::vacuum(n_cut);
}

json model_to_json(const ModelParams& p) {
    return json{{"u", p.u},
                {"delta", p.delta},
                {"amp", p.amp},
                {"theta_deg", rad_to_deg(p.theta)},
                {"lam", p.lam},
                {"eta", p.eta},
                {"n_cut", p.n_cut},
                {"terms",
                 {{"hamiltonian", p.terms.hamiltonian},
                  {"pump", p.terms.pump},
                  {"kerr", p.terms.kerr},
                  {"lindblad", p.terms.lindblad},
                  {"dephasing", p.terms.dephasing},
                  {"feedback_drift", p.terms.feedback_drift}}}};
}

ModelParams model_from_json(const json& j) {
    const std::string w = "model";
    check_keys(j, {"u", "delta", "amp", "theta_deg", "lam", "eta", "n_cut", "terms"}, w);
    ModelParams p;
    p.u = get_number(j, "u", p.u, w);
    p.delta = get_number(j, "delta", p.delta, w);
    p.amp = get_number(j, "amp", p.amp, w);
    p.theta = deg_to_rad(get_number(j, "theta_deg", 0.0, w));
    p.lam = get_number(j, "lam", p.lam, w);
    p.eta = get_number(j, "eta", p.eta, w);
    const std::int64_t n_cut = get_int(j, "n_cut", p.n_cut, w);
    if (n_cut < 2 || n_cut > 4096) throw ConfigError("'model.n_cut' must be in [2, 4096]");
    p.n_cut = static_cast<int>(n_cut);
    if (j.contains("terms")) {
        const json& t = j.at("terms");
        const std::string tw = "model.terms";
        check_keys(t, {"hamiltonian", "pump", "kerr", "lindblad", "dephasing", "feedback_drift"}, tw);
        p.terms.hamiltonian = get_bool(t, "hamiltonian", true, tw);
        p.terms.pump = get_bool(t, "pump", true, tw);
        p.terms.kerr = get_bool(t, "kerr", true, tw);
        p.terms.lindblad = get_bool(t, "lindblad", true, tw);
        p.terms.dephasing = get_bool(t, "dephasing", true, tw);
        p.terms.feedback_drift = get_bool(t, "feedback_drift", true, tw);
    }
    p.validate();
    return p;
}

json grid_to_json(const std::optional<PhaseSpaceGrid>& g) {
    if (!g) return "auto";
    return json{{"x_min", g->x_min}, {"x_max", g->x_max}, {"p_min", g->p_min},
                {"p_max", g->p_max}, {"nx", g->nx},       {"np", g->np}};
}

std::optional<PhaseSpaceGrid> grid_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "auto") return std::nullopt;
        throw ConfigError("'grid' must be \"auto\" or an object");
    }
    const std::string w = "grid";
    check_keys(j, {"x_min", "x_max", "p_min", "p_max", "nx", "np"}, w);
    for (const char* k : {"x_min", "x_max", "p_min", "p_max", "nx", "np"}) {
        if (!j.contains(k)) throw ConfigError("missing key 'grid." + std::string(k) + "'");
    }
    PhaseSpaceGrid g;
    g.x_min = get_number(j, "x_min", 0, w);
    g.x_max = get_number(j, "x_max", 0, w);
    g.p_min = get_number(j, "p_min", 0, w);
    g.p_max = get_number(j, "p_max", 0, w);
    g.nx = static_cast<int>(get_int(j, "nx", 0, w));
    g.np = static_cast<int>(get_int(j, "np", 0, w));
    g.validate();
    return g;
}

json evolution_to_json(const EvolutionConfig& c) {
    return json{{"dt", c.dt},
                {"t_max", c.t_max},
                {"record_every", c.record_every},
                {"ss_tol", c.ss_tol},
                {"tail_tol", c.tail_tol},
                {"snapshots", c.store_snapshots},
                {"negativity", c.record_negativity},
                {"min_eigenvalue", c.record_min_eigenvalue},
                {"stop_at_steady_state", c.stop_at_steady_state}};
}

namespace {

const std::set<std::string> kEvolutionKeys = {"dt",         "t_max",          "record_every",
                                              "ss_tol",     "tail_tol",       "snapshots",
                                              "negativity", "min_eigenvalue", "stop_at_steady_state"};

EvolutionConfig evolution_fields(const json& j, const std::string& w) {
    EvolutionConfig c;
    c.dt = get_number(j, "dt", c.dt, w);
    c.t_max = get_number(j, "t_max", c.t_max, w);
    const std::int64_t every = get_int(j, "record_every", c.record_every, w);
    if (every < 1 || every > 1'000'000'000) throw ConfigError("'" + key_path(w, "record_every") + "' must be positive");
    c.record_every = static_cast<int>(every);
    c.ss_tol = get_number(j, "ss_tol", c.ss_tol, w);
    c.tail_tol = get_number(j, "tail_tol", c.tail_tol, w);
    c.store_snapshots = get_bool(j, "snapshots", c.store_snapshots, w);
    c.record_negativity = get_bool(j, "negativity", c.record_negativity, w);
    c.record_min_eigenvalue = get_bool(j, "min_eigenvalue", c.record_min_eigenvalue, w);
    c.stop_at_steady_state = get_bool(j, "stop_at_steady_state", c.stop_at_steady_state, w);
    c.validate();
    return c;
}

InitialState initial_from_json(const json& j, const fs::path& base_dir) {
    InitialState s;
    if (j.is_string()) {
        if (j.get<std::string>() != "vacuum") throw ConfigError("'evolution.initial_state' string must be \"vacuum\"");
        return s;
    }
    const std::string w = "evolution.initial_state";
    check_keys(j, {"fock", "coherent", "file"}, w);
    if (j.size() != 1) throw ConfigError("'" + w + "' needs exactly one of fock, coherent, file");
    if (j.contains("fock")) {
        const std::int64_t n = get_int(j, "fock", 0, w);
        if (n < 0) throw ConfigError("'" + w + ".fock' must be non-negative");
        s.kind = InitialState::Kind::fock;
        s.fock = static_cast<int>(n);
    } else if (j.contains("coherent")) {
        const json& c = j.at("coherent");
        check_keys(c, {"re", "im"}, w + ".coherent");
        s.kind = InitialState::Kind::coherent;
        s.alpha = {get_number(c, "re", 0.0, w + ".coherent"), get_number(c, "im", 0.0, w + ".coherent")};
    } else {
        s.kind = InitialState::Kind::file;
        fs::path f = get_string(j, "file", "", w);
        if (f.is_relative()) f = base_dir / f;
        if (!fs::is_regular_file(f)) throw ConfigError("'" + w + ".file' not found: " + f.string());
        s.file = f;
    }
    return s;
}

}  // namespace

EvolutionConfig evolution_from_json(const json& j) {
    check_keys(j, kEvolutionKeys, "evolution");
    return evolution_fields(j, "evolution");
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    check_keys(j, {"model", "evolution", "grid", "grid_spacing", "outputs", "seed"}, "");
    if (!j.contains("model")) throw ConfigError("missing key 'model'");
    RunConfig c;
    c.model = model_from_json(j.at("model"));
    if (j.contains("evolution")) {
        const json& e = j.at("evolution");
        std::set<std::string> allowed = kEvolutionKeys;
        allowed.insert("initial_state");
        check_keys(e, allowed, "evolution");
        c.evolution = evolution_fields(e, "evolution");
        if (e.contains("initial_state")) c.initial = initial_from_json(e.at("initial_state"), base_dir);
    }
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
    c.grid_spacing = get_number(j, "grid_spacing", c.grid_spacing, "");
    if (!(c.grid_spacing > 0.0)) throw ConfigError("'grid_spacing' must be positive");
    c.outputs = get_string(j, "outputs", c.outputs.string(), "");
    if (c.outputs.empty()) throw ConfigError("'outputs' must not be empty");
    c.seed = get_int(j, "seed", 0, "");
    return c;
}

RunConfig read_run_config(const fs::path& path) {
    return run_config_from_json(read_json_file(path), path.parent_path());
}

// ---- sweeps -----------------------------------------------------------------

json sweep_spec_to_json(const SweepSpec& spec) {
    json axes = json::array();
    for (const auto& a : spec.axes) axes.push_back(json{{"name", a.name}, {"values", a.values}});
    return json{{"base", model_to_json(spec.base)},
                {"axes", axes},
                {"solver", to_string(spec.solver)},
                {"grid", grid_to_json(spec.grid)},
                {"grid_spacing", spec.grid_spacing},
                {"refine", spec.refine},
                {"evolution", evolution_to_json(spec.evolution)},
                {"budget", spec.budget},
                {"output", spec.output_path}};
}

SweepSpec sweep_spec_from_json(const json& j) {
    check_keys(j, {"base", "axes", "solver", "grid", "grid_spacing", "refine", "evolution", "budget", "output"}, "");
    if (!j.contains("base")) throw ConfigError("missing key 'base'");
    if (!j.contains("axes") || !j.at("axes").is_array()) throw ConfigError("'axes' must be an array");
    SweepSpec s;
    s.base = model_from_json(j.at("base"));
    for (std::size_t k = 0; k < j.at("axes").size(); ++k) {
        const json& a = j.at("axes")[k];
        const std::string w = "axes[" + std::to_string(k) + "]";
        check_keys(a, {"name", "values", "start", "stop", "step"}, w);
        SweepAxis axis;
        axis.name = get_string(a, "name", "", w);
        if (!is_scalar_param(axis.name)) throw ConfigError("'" + w + ".name': unknown parameter '" + axis.name + "'");
        if (a.contains("values")) {
            if (a.contains("start") || a.contains("stop") || a.contains("step")) {
                throw ConfigError("'" + w + "' mixes values with start/stop/step");
            }
            if (!a.at("values").is_array()) throw ConfigError("'" + w + ".values' must be an array");
            for (const auto& v : a.at("values")) {
                if (!v.is_number()) throw ConfigError("'" + w + ".values' holds a non-number");
                axis.values.push_back(v.get<double>());
            }
        } else {
            for (const char* key : {"start", "stop", "step"}) {
                if (!a.contains(key)) throw ConfigError("missing key '" + w + "." + key + "'");
            }
            axis.values = expand_range(get_number(a, "start", 0, w), get_number(a, "stop", 0, w),
                                       get_number(a, "step", 0, w), w);
        }
        s.axes.push_back(std::move(axis));
    }
    const std::string solver = get_string(j, "solver", "direct", "");
    if (solver == "direct") {
        s.solver = SweepSolver::direct;
    } else if (solver == "evolve") {
        s.solver = SweepSolver::evolve;
    } else {
        throw ConfigError("'solver' must be \"direct\" or \"evolve\"");
    }
    if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"));
    s.grid_spacing = get_number(j, "grid_spacing", s.grid_spacing, "");
    if (!(s.grid_spacing > 0.0)) throw ConfigError("'grid_spacing' must be positive");
    s.refine = get_bool(j, "refine", s.refine, "");
    if (j.contains("evolution")) s.evolution = evolution_from_json(j.at("evolution"));
    const std::int64_t budget = get_int(j, "budget", static_cast<std::int64_t>(s.budget), "");
    if (budget < 1) throw ConfigError("'budget' must be positive");
    s.budget = static_cast<std::size_t>(budget);
    s.output_path = get_string(j, "output", "", "");
    s.validate();
    return s;
}

SweepSpec read_sweep_spec(const fs::path& path) { return sweep_spec_from_json(read_json_file(path)); }

SweepPaths SweepPaths::from_stem(const fs::path& stem) {
    const std::string s = stem.string();
    return {s + ".csv", s + ".json", s + ".timing.csv", s + ".journal.csv"};
}

namespace {
const char* const kMetricColumns = "negativity,mean_n,purity,residual,tail_mass,error";
}

std::string sweep_csv_header(const SweepSpec& spec) {
    std::string h;
    for (const auto& a : spec.axes) h += a.name + ",";
    return h + kMetricColumns;
}

std::string sweep_csv_row(const SweepRow& r) {
    std::string line;
    for (double v : r.axis_values) line += format_double(v) + ",";
    if (r.ok() || r.error == "not_converged") {
        line += format_double(r.negativity) + "," + format_double(r.mean_n) + "," + format_double(r.purity) + "," +
                format_double(r.residual) + "," + format_double(r.tail_mass) + ",";
    } else {
        line += "nan,nan,nan,nan,nan,";
    }
    return line + r.error;
}

std::optional<SweepRow> parse_sweep_csv_row(const std::string& line, std::size_t axis_count) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != axis_count + 6) return std::nullopt;
    const auto num = [](const std::string& s, double& out) {
        char* end = nullptr;
        out = std::strtod(s.c_str(), &end);
        return !s.empty() && end == s.c_str() + s.size();
    };
    SweepRow r;
    r.axis_values.resize(axis_count);
    for (std::size_t k = 0; k < axis_count; ++k) {
        if (!num(cells[k], r.axis_values[k])) return std::nullopt;
    }
    double* metrics[] = {&r.negativity, &r.mean_n, &r.purity, &r.residual, &r.tail_mass};
    for (std::size_t k = 0; k < 5; ++k) {
        if (!num(cells[axis_count + k], *metrics[k])) return std::nullopt;
    }
    r.error = cells.back();
    return r;
}

namespace {

void read_rows(const fs::path& path, std::size_t axis_count, bool has_header, std::map<std::vector<double>, SweepRow>& out) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    if (has_header) std::getline(in, line);
    while (std::getline(in, line)) {
        // A torn final line from an interrupted write simply fails to parse.
        if (auto row = parse_sweep_csv_row(line, axis_count)) out.insert_or_assign(row->axis_values, *row);
    }
}

}  // namespace

std::vector<SweepRow> load_completed_rows(const SweepSpec& spec, const SweepPaths& paths) {
    if (!fs::is_regular_file(paths.sidecar)) return {};
    json sidecar;
    try {
        sidecar = read_json_file(paths.sidecar);
    } catch (const ConfigError&) {
        return {};
    }
    if (!sidecar.contains("spec") || sidecar.at("spec") != sweep_spec_to_json(spec)) return {};

    std::map<std::vector<double>, SweepRow> rows;
    read_rows(paths.csv, spec.axes.size(), true, rows);
    read_rows(paths.journal, spec.axes.size(), false, rows);
    std::vector<SweepRow> out;
    out.reserve(rows.size());
    for (auto& [_, r] : rows) out.push_back(std::move(r));
    return out;
}

void write_sweep_sidecar(const SweepSpec& spec, const fs::path& path) {
    json columns = json::array();
    for (const auto& a : spec.axes) columns.push_back(a.name);
    for (const char* m : {"negativity", "mean_n", "purity", "residual", "tail_mass", "error"}) columns.push_back(m);
    const json sidecar{{"version", version}, {"columns", columns}, {"spec", sweep_spec_to_json(spec)}};
    auto out = open_out(path);
    out << sidecar.dump(2) << '\n';
}

void write_sweep_result(const SweepResult& result, const SweepPaths& paths) {
    write_sweep_sidecar(result.spec, paths.sidecar);
    {
        auto out = open_out(paths.csv);
        out << sweep_csv_header(result.spec) << '\n';
        for (const auto& r : result.rows) out << sweep_csv_row(r) << '\n';
        if (!out) throw ConfigError("write failed: " + paths.csv.string());
    }
    {
        auto out = open_out(paths.timing);
        std::string header;
        for (const auto& a : result.spec.axes) header += a.name + ",";
        out << header << "wall_time\n";
        for (const auto& r : result.rows) {
            for (double v : r.axis_values) out << format_double(v) << ',';
            out << format_double(r.wall_time) << '\n';
        }
    }
}

}  // namespace kfs::io
