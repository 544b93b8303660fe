#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kfs/dynamics.hpp"
#include "kfs/fock.hpp"
#include "kfs/sweep.hpp"
#include "kfs/wigner.hpp"

namespace kfs::io {

namespace fs = std::filesystem;

// ---- states ---------------------------------------------------------------

nlohmann::json state_to_json(const DensityMatrix& rho);
DensityMatrix state_from_json(const nlohmann::json& j);
void write_state(const fs::path& path, const DensityMatrix& rho);
DensityMatrix read_state(const fs::path& path);

// ---- tabular outputs --------------------------------------------------------

void write_wigner_csv(const fs::path& path, const WignerField& field);
/// Negativity column holds "nan" when it was not recorded.
void write_timeseries_csv(const fs::path& path, const TimeSeries& series);

// ---- run configuration ------------------------------------------------------

/// Starting state of an evolution: "vacuum", {"fock": n},
/// {"coherent": {"re": x, "im": y}} or {"file": path}.
struct InitialState {
    enum class Kind { vacuum, fock, coherent, file } kind = Kind::vacuum;
    int fock = 0;
    cplx alpha{};
    fs::path file;

    DensityMatrix build(int n_cut) const;
};

struct RunConfig {
    ModelParams model{};
    EvolutionConfig evolution{};
    InitialState initial{};
    std::optional<PhaseSpaceGrid> grid{};  ///< nullopt: "auto"
    double grid_spacing = 0.08;
    fs::path outputs = "out";
    std::int64_t seed = 0;  ///< reserved
};

nlohmann::json model_to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const std::optional<PhaseSpaceGrid>& g);
std::optional<PhaseSpaceGrid> grid_from_json(const nlohmann::json& j);
nlohmann::json evolution_to_json(const EvolutionConfig& c);
EvolutionConfig evolution_from_json(const nlohmann::json& j);

/// Strict: unknown keys, wrong types and invalid values throw ConfigError
/// naming the offending key. Relative state-file paths resolve against
/// `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
RunConfig read_run_config(const fs::path& path);

// ---- sweeps -----------------------------------------------------------------

nlohmann::json sweep_spec_to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);
SweepSpec read_sweep_spec(const fs::path& path);

struct SweepPaths {
    fs::path csv;
    fs::path sidecar;
    fs::path timing;
    fs::path journal;  ///< rows of an interrupted run, in completion order

    static SweepPaths from_stem(const fs::path& stem);
};

std::string sweep_csv_header(const SweepSpec& spec);
std::string sweep_csv_row(const SweepRow& row);
/// Inverse of sweep_csv_row; nullopt for malformed lines.
std::optional<SweepRow> parse_sweep_csv_row(const std::string& line, std::size_t axis_count);

/// Rows recoverable from a previous run with an identical spec echo (final
/// CSV and journal); empty if the sidecar is absent or differs.
std::vector<SweepRow> load_completed_rows(const SweepSpec& spec, const SweepPaths& paths);

/// Sidecar first, then the CSV, then per-row wall times. Throws ConfigError
/// if the output location is unwritable.
void write_sweep_result(const SweepResult& result, const SweepPaths& paths);
void write_sweep_sidecar(const SweepSpec& spec, const fs::path& path);

/// Formats a double with 17 significant digits ("nan"/"inf" for non-finite).
std::string format_double(double v);

}  // namespace kfs::io
