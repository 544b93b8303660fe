#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kfs/dynamics.hpp"
#include "kfs/params.hpp"
#include "kfs/wigner.hpp"

namespace kfs {

struct SweepAxis {
    std::string name;  ///< one of scalar_param_names(); angles in degrees
    std::vector<double> values;

    bool operator==(const SweepAxis&) const = default;
};

enum class SweepSolver { direct, evolve };

struct SweepSpec {
    ModelParams base{};
    std::vector<SweepAxis> axes;
    SweepSolver solver = SweepSolver::direct;
    std::optional<PhaseSpaceGrid> grid{};  ///< nullopt: automatic grid per point
    double grid_spacing = 0.08;            ///< auto-grid spacing
    bool refine = false;                   ///< resolution-doubling check per point
    EvolutionConfig evolution{};           ///< used by the evolve solver
    std::string output_path;               ///< stem; "" for in-memory sweeps
    std::size_t budget = 20000;

    std::size_t total_points() const;
    /// Throws ConfigError on a bad axis count, unknown names, empty axes or
    /// a budget breach.
    void validate() const;
    /// Model parameters at a lexicographic point index.
    ModelParams point(std::size_t index) const;
    std::vector<double> axis_values(std::size_t index) const;
};

struct SweepRow {
    std::vector<double> axis_values;
    double negativity = 0.0;
    double mean_n = 0.0;
    double purity = 0.0;
    double residual = 0.0;
    double tail_mass = 0.0;
    double wall_time = 0.0;  ///< seconds; not part of the deterministic result file
    std::string error;       ///< empty on success, else an error code

    bool ok() const { return error.empty(); }
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;  ///< lexicographic axis order
    std::string version;
};

/// Solves one grid point; never throws for numerical failures, which are
/// recorded in `error`.
SweepRow solve_point(const SweepSpec& spec, std::size_t index);

/// Called once per freshly solved row, serialized under a lock.
using RowCallback = std::function<void(std::size_t index, const SweepRow& row)>;

/// Runs every point not already present in `existing` (matched by axis
/// values) on `worker_count` threads. Output is independent of worker count.
SweepResult run_sweep(const SweepSpec& spec, int worker_count, const std::vector<SweepRow>& existing = {},
                      const RowCallback& on_row = {});

struct ConvergenceRow {
    int n_cut = 0;
    double negativity = 0.0;
    double mean_n = 0.0;
    double tail_mass = 0.0;
    bool converged = false;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<int> converged_at;  ///< smallest cutoff whose row is converged
};

struct ConvergenceOptions {
    double relative_tol = 0.01;
    double absolute_floor = 1e-4;  ///< negativity differences below this count as equal
    double tail_tol = 1e-6;
    NegativityOptions negativity{};
};

/// Steady state at each cutoff (increasing). A row is converged when its
/// tail mass is below tail_tol and its negativity agrees with the next
/// cutoff's (the previous one, for the last row) within relative_tol.
ConvergenceTable convergence_scan(const ModelParams& params, const std::vector<int>& cutoffs,
                                  const ConvergenceOptions& options = {});

std::string to_string(SweepSolver s);

}  // namespace kfs
