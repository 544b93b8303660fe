#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kfs/errors.hpp"
#include "kfs/io.hpp"
#include "kfs/sweep.hpp"

using namespace kfs;
namespace fs = std::filesystem;

namespace {

SweepSpec small_map() {
    SweepSpec s;
    s.base.u = 0.3;
    s.base.amp = 2.0;
    s.base.n_cut = 40;
    s.axes = {{"lam", {0.0, 0.4, 0.8}}, {"theta_deg", {-30.0, 0.0, 30.0, 60.0}}};
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "kfs_test_sweep";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("rows come out in lexicographic order") {
    const SweepSpec s = small_map();
    const SweepResult r = run_sweep(s, 3);
    REQUIRE(r.rows.size() == 12);
    CHECK(r.rows[0].axis_values == std::vector<double>{0.0, -30.0});
    CHECK(r.rows[5].axis_values == std::vector<double>{0.4, 0.0});
    CHECK(r.rows[11].axis_values == std::vector<double>{0.8, 60.0});
    for (const auto& row : r.rows) {
        CHECK(row.ok());
        CHECK(row.negativity >= 0.0);
        CHECK(row.residual < s.evolution.ss_tol);
    }
    // no feedback, no negativity
    for (int k = 0; k < 4; ++k) CHECK(r.rows[k].negativity < 1e-4);
}

TEST_CASE("result files are byte-identical for 1 and 4 workers") {
    SweepSpec s = small_map();
    const auto one = io::SweepPaths::from_stem(scratch("one"));
    const auto four = io::SweepPaths::from_stem(scratch("four"));
    io::write_sweep_result(run_sweep(s, 1), one);
    io::write_sweep_result(run_sweep(s, 4), four);
    CHECK(slurp(one.csv) == slurp(four.csv));
    CHECK(slurp(one.sidecar) == slurp(four.sidecar));
    CHECK(slurp(one.csv).rfind("lam,theta_deg,negativity,mean_n,purity,residual,tail_mass,error\n", 0) == 0);
}

TEST_CASE("failed points carry an error code without aborting") {
    SweepSpec s;
    s.base.amp = 1.0;
    s.base.n_cut = 30;
    s.axes = {{"n_cut", {8.0, 30.0}}};
    s.evolution.ss_tol = 1e-8;
    const SweepResult r = run_sweep(s, 2);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].error == "cutoff");
    CHECK(r.rows[1].ok());
}

TEST_CASE("an interrupted sweep recomputes only the missing rows") {
    SweepSpec s = small_map();
    const auto paths = io::SweepPaths::from_stem(scratch("resume"));
    fs::remove(paths.csv);
    const SweepResult full = run_sweep(s, 2);

    // simulate a crash after five rows: sidecar plus journal, no final csv
    io::write_sweep_sidecar(s, paths.sidecar);
    {
        std::ofstream j(paths.journal);
        for (std::size_t k : {7u, 0u, 3u, 11u, 5u}) j << io::sweep_csv_row(full.rows[k]) << '\n';
        j << "0.8,-30,0.01";  // torn line
    }
    const std::vector<SweepRow> done = io::load_completed_rows(s, paths);
    CHECK(done.size() == 5);

    std::atomic<int> computed{0};
    const SweepResult resumed = run_sweep(s, 2, done, [&](std::size_t, const SweepRow&) { ++computed; });
    CHECK(computed == 7);
    const auto a = io::SweepPaths::from_stem(scratch("resume_full"));
    io::write_sweep_result(full, a);
    io::write_sweep_result(resumed, paths);
    CHECK(slurp(paths.csv) == slurp(a.csv));

    // a changed spec invalidates previous rows
    SweepSpec other = s;
    other.base.amp = 2.5;
    CHECK(io::load_completed_rows(other, paths).empty());
}

TEST_CASE("spec validation") {
    SweepSpec s = small_map();
    s.budget = 11;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_map();
    s.axes.push_back({"lam", {0.1}});
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_map();
    s.axes = {{"u", {0.1}}, {"amp", {1.0}}, {"lam", {0.1}}, {"delta", {0.0}}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_map();
    s.axes[0].name = "kappa";
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(run_sweep(s, 1), ConfigError);
}

TEST_CASE("convergence scan") {
    ModelParams linear;
    linear.amp = 1.0;
    const ConvergenceTable t = convergence_scan(linear, {10, 15, 20, 25, 30});
    REQUIRE(t.converged_at.has_value());
    CHECK(*t.converged_at <= 20);
    CHECK(t.rows.back().mean_n == doctest::Approx(4.0).epsilon(1e-6));

    ModelParams dark;
    const ConvergenceTable v = convergence_scan(dark, {4, 8});
    CHECK(v.converged_at == 4);
    CHECK(v.rows[0].negativity == 0.0);

    CHECK_THROWS_AS(convergence_scan(linear, {20, 10}), ConfigError);
}
