// kfs: command-line driver for the Kerr-cavity feedback simulator.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "kfs/analysis.hpp"
#include "kfs/dynamics.hpp"
#include "kfs/errors.hpp"
#include "kfs/io.hpp"
#include "kfs/kernels/kernels.hpp"
#include "kfs/sweep.hpp"
#include "kfs/version.hpp"
#include "kfs/wigner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_workers() {
    if (const char* env = std::getenv("KFS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void print_kv(const std::string& key, double value) { std::printf("%s = %.6f\n", key.c_str(), value); }
void print_kv_sci(const std::string& key, double value) { std::printf("%s = %.3e\n", key.c_str(), value); }

json observables_json(const kfs::DensityMatrix& rho) {
    const kfs::Observables o = kfs::observables(rho);
    return json{{"mean_n", o.mean_n}, {"re_a", o.mean_a.real()}, {"im_a", o.mean_a.imag()},
                {"purity", o.purity}, {"tail_mass", o.tail_mass}};
}

kfs::NegativityReport state_negativity(const kfs::DensityMatrix& rho, const std::optional<kfs::PhaseSpaceGrid>& grid,
                                       double spacing, bool refine) {
    if (grid) {
        if (refine) return kfs::negativity_with_refinement(rho, *grid);
        const kfs::WignerField field = kfs::wigner_transform(rho, *grid);
        kfs::NegativityReport r;
        r.value = kfs::negativity(field);
        r.normalization = field.integral();
        r.grid = *grid;
        return r;
    }
    kfs::NegativityOptions opt;
    opt.spacing = spacing;
    opt.refine = refine;
    return kfs::negativity_of_state(rho, true, opt);
}

int cmd_evolve(const fs::path& config_path, const std::optional<fs::path>& out_override) {
    kfs::io::RunConfig cfg = kfs::io::read_run_config(config_path);
    const fs::path out = out_override.value_or(cfg.outputs);
    const kfs::DensityMatrix rho0 = cfg.initial.build(cfg.model.n_cut);

    const kfs::EvolutionResult res = kfs::evolve(rho0, cfg.model, cfg.evolution);
    kfs::io::write_timeseries_csv(out / "timeseries.csv", res.series);
    kfs::io::write_state(out / "final_state.json", res.final_state);
    for (std::size_t k = 0; k < res.series.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%05zu.json", k);
        kfs::io::write_state(out / "snapshots" / name, res.series.snapshots[k]);
    }

    json summary = observables_json(res.final_state);
    summary["t_final"] = res.t_final;
    summary["reached_steady_state"] = res.reached_steady_state;
    summary["final_derivative_norm"] = res.final_derivative_norm;
    summary["max_step_error"] = res.max_step_error;
    summary["version"] = kfs::version;
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';

    print_kv("t_final", res.t_final);
    print_kv("mean_n", summary["mean_n"]);
    print_kv("purity", summary["purity"]);
    print_kv_sci("step_error", res.max_step_error);
    std::printf("steady = %s\n", res.reached_steady_state ? "yes" : "no");
    return 0;
}

int cmd_steady(const fs::path& config_path, const std::optional<fs::path>& out_override, const std::string& method,
               bool refine) {
    kfs::io::RunConfig cfg = kfs::io::read_run_config(config_path);
    const fs::path out = out_override.value_or(cfg.outputs);

    kfs::SteadyStateResult ss;
    const bool direct = method == "direct" || (method == "auto" && cfg.model.n_cut <= kfs::kDefaultLiouvillianMaxDim);
    if (direct) {
        kfs::DirectSolveOptions opt;
        opt.ss_tol = cfg.evolution.ss_tol;
        ss = kfs::solve_steady_direct(cfg.model, opt);
    } else {
        ss = kfs::solve_steady_evolved(cfg.model, cfg.evolution, cfg.initial.build(cfg.model.n_cut));
    }
    const kfs::NegativityReport neg = state_negativity(ss.rho, cfg.grid, cfg.grid_spacing, refine);
    const kfs::WignerField field = kfs::wigner_transform(ss.rho, neg.grid);

    kfs::io::write_state(out / "steady_state.json", ss.rho);
    kfs::io::write_wigner_csv(out / "wigner.csv", field);
    json obs = observables_json(ss.rho);
    obs["negativity"] = neg.value;
    obs["wigner_norm"] = neg.normalization;
    obs["residual"] = ss.residual;
    obs["converged"] = ss.converged;
    obs["min_eigenvalue"] = ss.min_eigenvalue;
    obs["method"] = kfs::to_string(ss.method);
    obs["version"] = kfs::version;
    std::ofstream(out / "observables.json") << obs.dump(2) << '\n';

    print_kv("mean_n", obs["mean_n"]);
    print_kv("re_a", obs["re_a"]);
    print_kv("im_a", obs["im_a"]);
    print_kv("purity", obs["purity"]);
    print_kv("negativity", neg.value);
    print_kv_sci("residual", ss.residual);
    if (!ss.positivity_ok) std::fprintf(stderr, "warning: min eigenvalue %.3e below -1e-6\n", ss.min_eigenvalue);
    if (!ss.converged) {
        std::fprintf(stderr, "kfs: error[numerical]: steady-state residual %.3e above ss_tol\n", ss.residual);
        return static_cast<int>(kfs::ErrorCategory::numerical);
    }
    return 0;
}

struct GridFlags {
    std::optional<double> x_min, x_max, p_min, p_max;
    std::optional<int> nx, np;
    double spacing = 0.08;
    bool refine = false;
};

int cmd_wigner(const fs::path& state_path, const GridFlags& flags, const fs::path& out) {
    const kfs::DensityMatrix rho = kfs::io::read_state(state_path);
    std::optional<kfs::PhaseSpaceGrid> grid;
    if (flags.x_min || flags.x_max || flags.p_min || flags.p_max || flags.nx || flags.np) {
        kfs::PhaseSpaceGrid g = kfs::infer_grid(rho, true, flags.spacing);
        g.x_min = flags.x_min.value_or(g.x_min);
        g.x_max = flags.x_max.value_or(g.x_max);
        g.p_min = flags.p_min.value_or(g.p_min);
        g.p_max = flags.p_max.value_or(g.p_max);
        g.nx = flags.nx.value_or(g.nx);
        g.np = flags.np.value_or(g.np);
        g.validate();
        grid = g;
    }
    const kfs::NegativityReport neg = state_negativity(rho, grid, flags.spacing, flags.refine);
    kfs::io::write_wigner_csv(out, kfs::wigner_transform(rho, neg.grid));
    print_kv("negativity", neg.value);
    print_kv("wigner_norm", neg.normalization);
    if (flags.refine) print_kv_sci("refinement_delta", neg.refinement_delta);
    return 0;
}

int cmd_sweep(const fs::path& spec_path, int workers, const std::optional<fs::path>& out_override, bool fresh) {
    kfs::SweepSpec spec = kfs::io::read_sweep_spec(spec_path);
    if (out_override) spec.output_path = out_override->string();
    if (spec.output_path.empty()) throw kfs::ConfigError("sweep needs an output stem ('output' or -o)");
    const auto paths = kfs::io::SweepPaths::from_stem(spec.output_path);

    std::vector<kfs::SweepRow> done;
    if (!fresh) done = kfs::io::load_completed_rows(spec, paths);
    const bool resuming = !done.empty();
    if (!resuming) {
        kfs::io::write_sweep_sidecar(spec, paths.sidecar);
        std::ofstream(paths.journal, std::ios::trunc);
    }
    std::ofstream journal(paths.journal, std::ios::app);
    if (!journal) throw kfs::ConfigError("cannot write " + paths.journal.string());

    const kfs::SweepResult result = kfs::run_sweep(spec, workers, done, [&](std::size_t, const kfs::SweepRow& row) {
        journal << kfs::io::sweep_csv_row(row) << '\n' << std::flush;
    });
    journal.close();
    kfs::io::write_sweep_result(result, paths);
    fs::remove(paths.journal);

    std::size_t failed = 0;
    for (const auto& r : result.rows) failed += r.ok() ? 0 : 1;
    std::printf("rows = %zu\nreused = %zu\nfailed = %zu\nresult = %s\n", result.rows.size(), done.size(), failed,
                paths.csv.string().c_str());
    return 0;
}

struct EstimateFlags {
    kfs::PolaritonParams polariton{};
    std::optional<double> eta0, reflectance;
};

int cmd_estimate(const EstimateFlags& f) {
    if (f.eta0 || f.reflectance) {
        if (!f.eta0 || !f.reflectance) throw kfs::ConfigError("--eta0 and --reflectance go together");
        print_kv("eta", kfs::effective_eta(*f.eta0, *f.reflectance));
        return 0;
    }
    std::printf("U = %.3f ueV\n", kfs::estimate_interaction(f.polariton));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kerr cavity with homodyne feedback: master-equation simulator"};
    app.set_version_flag("--version", std::string("kfs ") + kfs::version);
    app.require_subcommand(1);

    fs::path config, state, spec;
    std::optional<fs::path> out_dir;
    std::string method = "auto";
    bool refine = false;

    auto* evolve = app.add_subcommand("evolve", "Integrate the master equation; writes timeseries and states");
    evolve->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    evolve->add_option("-o,--out", out_dir, "Output directory (overrides 'outputs')");

    auto* steady = app.add_subcommand("steady", "Solve for the steady state; writes state, field and observables");
    steady->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    steady->add_option("-o,--out", out_dir, "Output directory (overrides 'outputs')");
    steady->add_option("--method", method, "direct, evolve or auto")
        ->check(CLI::IsMember({"auto", "direct", "evolve"}));
    steady->add_flag("--refine", refine, "Check negativity against a doubled grid");

    GridFlags grid;
    fs::path field_out = "wigner.csv";
    auto* wigner = app.add_subcommand("wigner", "Wigner field and negativity of a state file");
    wigner->add_option("state", state, "State file (JSON)")->required()->check(CLI::ExistingFile);
    wigner->add_option("--x-min", grid.x_min);
    wigner->add_option("--x-max", grid.x_max);
    wigner->add_option("--p-min", grid.p_min);
    wigner->add_option("--p-max", grid.p_max);
    wigner->add_option("--nx", grid.nx);
    wigner->add_option("--np", grid.np);
    wigner->add_option("--spacing", grid.spacing, "Auto-grid spacing")->check(CLI::PositiveNumber);
    wigner->add_flag("--refine", grid.refine, "Check negativity against a doubled grid");
    wigner->add_option("-o,--out", field_out, "Field CSV path");

    int workers = default_workers();
    bool fresh = false;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep; resumes an interrupted run");
    sweep->add_option("spec", spec, "Sweep specification (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("-w,--workers", workers, "Worker threads (default: KFS_THREADS or core count)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("-o,--out", out_dir, "Output stem (overrides 'output')");
    sweep->add_flag("--fresh", fresh, "Ignore rows from a previous run");

    EstimateFlags est;
    auto* estimate = app.add_subcommand("estimate", "Interaction strength U, or effective efficiency eta");
    estimate->add_option("--bohr-radius", est.polariton.bohr_radius, "Exciton Bohr radius [nm]");
    estimate->add_option("--hopfield", est.polariton.hopfield_x, "Hopfield coefficient |X|");
    estimate->add_option("--epsilon", est.polariton.permittivity, "Relative permittivity");
    estimate->add_option("--trap-area", est.polariton.trap_area, "Trap area [um^2]");
    estimate->add_option("--eta0", est.eta0, "Bare homodyne efficiency");
    estimate->add_option("--reflectance", est.reflectance, "Feedback beamsplitter reflectance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(kfs::ErrorCategory::config);
    }

    try {
        if (*evolve) return cmd_evolve(config, out_dir);
        if (*steady) return cmd_steady(config, out_dir, method, refine);
        if (*wigner) return cmd_wigner(state, grid, field_out);
        if (*sweep) return cmd_sweep(spec, workers, out_dir, fresh);
        if (*estimate) return cmd_estimate(est);
    } catch (const kfs::Error& e) {
        std::fprintf(stderr, "kfs: error[%s]: %s\n", e.category_name(), e.what());
        return static_cast<int>(e.category());
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "kfs: error[resource]: out of memory\n");
        return static_cast<int>(kfs::ErrorCategory::resource);
    }
    return 0;
}
