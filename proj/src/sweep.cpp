#include "kfs/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "kfs/errors.hpp"
#include "kfs/version.hpp"

namespace kfs {

std::string to_string(SweepSolver s) { return s == SweepSolver::direct ? "direct" : "evolve"; }

std::size_t SweepSpec::total_points() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

void SweepSpec::validate() const {
    base.validate();
    if (axes.empty() || axes.size() > 3) throw ConfigError("a sweep needs between 1 and 3 axes");
    for (const auto& a : axes) {
        if (!is_scalar_param(a.name)) throw ConfigError("sweep axis '" + a.name + "' is not a model parameter");
        if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
        for (std::size_t j = i + 1; j < axes.size(); ++j) {
            if (axes[i].name == axes[j].name) throw ConfigError("duplicate sweep axis '" + axes[i].name + "'");
        }
    }
    if (total_points() > budget) {
        throw ConfigError("sweep has " + std::to_string(total_points()) + " points, over the budget of " +
                          std::to_string(budget));
    }
    if (grid) grid->validate();
    if (solver == SweepSolver::evolve) evolution.validate();
}

std::vector<double> SweepSpec::axis_values(std::size_t index) const {
    std::vector<double> v(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const std::size_t len = axes[k].values.size();
        v[k] = axes[k].values[index % len];
        index /= len;
    }
    return v;
}

ModelParams SweepSpec::point(std::size_t index) const {
    ModelParams p = base;
    const std::vector<double> v = axis_values(index);
    for (std::size_t k = 0; k < axes.size(); ++k) set_scalar_param(p, axes[k].name, v[k]);
    return p;
}

namespace {

std::string error_code(const Error& e) {
    if (dynamic_cast<const DegenerateSteadyStateError*>(&e)) return "degenerate";
    if (dynamic_cast<const CutoffTooSmallError*>(&e)) return "cutoff";
    if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
    if (dynamic_cast<const GridTooSmallError*>(&e)) return "grid";
    if (dynamic_cast<const ResourceError*>(&e)) return "resource";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    return "numerical";
}

}  // namespace

SweepRow solve_point(const SweepSpec& spec, std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    row.axis_values = spec.axis_values(index);
    try {
        const ModelParams p = spec.point(index);
        p.validate();
        SteadyStateResult ss;
        if (spec.solver == SweepSolver::direct) {
            DirectSolveOptions opt;
            opt.ss_tol = spec.evolution.ss_tol;
            ss = solve_steady_direct(p, opt);
        } else {
            ss = solve_steady_evolved(p, spec.evolution);
        }
        const Observables o = observables(ss.rho);
        row.mean_n = o.mean_n;
        row.purity = o.purity;
        row.residual = ss.residual;
        row.tail_mass = ss.tail_mass;
        if (ss.tail_mass > spec.evolution.tail_tol) {
            row.error = "cutoff";
            row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return row;
        }

        WignerOptions wopt;
        wopt.threads = 1;
        if (spec.grid) {
            row.negativity = spec.refine ? negativity_with_refinement(ss.rho, *spec.grid, wopt).value
                                         : negativity(wigner_transform(ss.rho, *spec.grid, wopt));
        } else {
            NegativityOptions nopt;
            nopt.refine = spec.refine;
            nopt.spacing = spec.grid_spacing;
            nopt.wigner = wopt;
            row.negativity = negativity_of_state(ss.rho, true, nopt).value;
        }
        if (!ss.converged) row.error = "not_converged";
    } catch (const Error& e) {
        row.error = error_code(e);
    } catch (const std::exception&) {
        row.error = "internal";
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

SweepResult run_sweep(const SweepSpec& spec, int worker_count, const std::vector<SweepRow>& existing,
                      const RowCallback& on_row) {
    spec.validate();
    const std::size_t total = spec.total_points();

    SweepResult result;
    result.spec = spec;
    result.version = version;
    result.rows.resize(total);

    std::map<std::vector<double>, const SweepRow*> known;
    for (const auto& r : existing) known.emplace(r.axis_values, &r);

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < total; ++i) {
        if (auto it = known.find(spec.axis_values(i)); it != known.end()) {
            result.rows[i] = *it->second;
        } else {
            todo.push_back(i);
        }
    }

    // Each job writes only its own slot; the lock only serializes the callback.
    std::atomic<std::size_t> next{0};
    std::mutex collector;
    const auto worker = [&] {
        for (std::size_t k = next++; k < todo.size(); k = next++) {
            result.rows[todo[k]] = solve_point(spec, todo[k]);
            if (on_row) {
                std::lock_guard lock(collector);
                on_row(todo[k], result.rows[todo[k]]);
            }
        }
    };
    const int workers = std::max(1, std::min<int>(worker_count, static_cast<int>(std::max<std::size_t>(1, todo.size()))));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    return result;
}

ConvergenceTable convergence_scan(const ModelParams& params, const std::vector<int>& cutoffs,
                                  const ConvergenceOptions& options) {
    if (cutoffs.empty()) throw ConfigError("convergence scan needs at least one cutoff");
    for (std::size_t i = 1; i < cutoffs.size(); ++i) {
        if (cutoffs[i] <= cutoffs[i - 1]) throw ConfigError("convergence scan cutoffs must be increasing");
    }
    ConvergenceTable table;
    for (int n_cut : cutoffs) {
        ModelParams p = params;
        p.n_cut = n_cut;
        const SteadyStateResult ss = solve_steady_direct(p);
        ConvergenceRow row;
        row.n_cut = n_cut;
        row.mean_n = observables(ss.rho).mean_n;
        row.tail_mass = ss.tail_mass;
        try {
            row.negativity = negativity_of_state(ss.rho, true, options.negativity).value;
        } catch (const GridTooSmallError&) {
            // a truncated state need not integrate to one; the row is simply unconverged
            row.negativity = std::nan("");
        }
        table.rows.push_back(row);
    }
    const auto agree = [&](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return false;
        const double diff = std::abs(a - b);
        return diff <= options.absolute_floor || diff < options.relative_tol * std::max(std::abs(a), std::abs(b));
    };
    auto& rows = table.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t j = (i + 1 < rows.size()) ? i + 1 : (i > 0 ? i - 1 : i);
        rows[i].converged = rows[i].tail_mass < options.tail_tol && (j == i || agree(rows[i].negativity, rows[j].negativity));
        if (rows[i].converged && !table.converged_at) table.converged_at = rows[i].n_cut;
    }
    return table;
}

}  // namespace kfs
