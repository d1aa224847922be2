#include "cli.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "giantbic/bic.hpp"
#include "giantbic/csv.hpp"
#include "giantbic/dynamics.hpp"
#include "giantbic/scenario.hpp"
#include "giantbic/spectrum.hpp"

namespace {

using namespace giantbic;
using giantbic::cli::kExitCheck;
namespace fs = std::filesystem;

struct Common {
    std::string scenario{"fig3"};
    std::string out;
    std::optional<double> dt;
    std::optional<double> t_max;
    std::optional<int> n_c;
    unsigned workers{1};
    std::string initial;

    fs::path out_dir() const { return out.empty() ? default_output_dir() : fs::path(out); }

    Scenario load() const {
        Scenario s = load_scenario(scenario);
        if (dt) s.run.dt = *dt;
        if (t_max) s.run.t_max = *t_max;
        if (n_c) {
            if (*n_c <= 0) throw ConfigError("--nc must be positive");
            s.run.n_c = *n_c;
        }
        if (!initial.empty()) {
            auto sel = parse_atom_selector(initial);
            if (!sel) throw ConfigError("--initial must be atom1, atom2, symmetric or antisymmetric");
            s.initial = *sel;
        }
        s.run.system = validate_config(s.run.system);
        (void)s.run.grid();  // validates dt and t_max
        return s;
    }
};

void add_common(CLI::App* cmd, Common& c, bool with_time) {
    cmd->add_option("scenario", c.scenario, "Preset name or config file")->capture_default_str();
    cmd->add_option("--out", c.out, "Output directory (default: $GIANTBIC_OUT or ./giantbic-out)");
    cmd->add_option("--nc", c.n_c, "Finite-lattice size");
    cmd->add_option("--workers", c.workers, "Worker threads")->capture_default_str();
    if (with_time) {
        cmd->add_option("--dt", c.dt, "Time step in units of 1/xi");
        cmd->add_option("--tmax", c.t_max, "Final time in units of 1/xi");
        cmd->add_option("--initial", c.initial, "atom1 | atom2 | symmetric | antisymmetric");
    }
}

Classification lattice_of(const Scenario& s) {
    const auto& cfg = s.run.system;
    const int n_c = std::max(s.run.n_c, minimum_lattice_size(cfg));
    return classify_bound_states(eigendecompose(build_hamiltonian(cfg, n_c)), cfg);
}

void report_files(const fs::path& dir, const std::map<std::string, std::string>& files) {
    write_artifacts(dir, files);
    for (const auto& [name, body] : files) std::cout << "wrote " << (dir / name).string() << "\n";
}

int cmd_spectrum(const Common& c) {
    const Scenario s = c.load();
    const Classification lattice = lattice_of(s);
    std::map<std::string, std::string> files{{"spectrum.csv", spectrum_csv(lattice)}};
    for (const auto& st : lattice.states) {
        if (st.kind == StateClass::extended) continue;
        files["profile_" + std::to_string(st.index) + ".csv"] = profile_csv(lattice, st.index);
        std::cout << to_string(st.kind) << "  index " << st.index << "  E = " << format_real(st.energy, 10)
                  << "  IPR = " << format_real(st.ipr, 4) << "  |A1|^2 = " << format_real(st.a1 * st.a1, 4)
                  << "  |A2|^2 = " << format_real(st.a2 * st.a2, 4) << (st.ambiguous ? "  (ambiguous)" : "")
                  << "\n";
    }
    std::cout << "n_c = " << lattice.basis.n_c << ": " << lattice.count(StateClass::bic) << " BIC, "
              << lattice.count(StateClass::boc) << " BOC\n";
    report_files(c.out_dir(), files);
    return 0;
}

int cmd_bic(const Common& c) {
    const Scenario s = c.load();
    const auto& cfg = s.run.system;
    RootOptions ro;
    ro.lattice_n_c = 0;
    RootSearch search = find_bic_roots(cfg, ro);
    const Classification lattice = lattice_of(s);
    cross_check_with_lattice(search, lattice, cfg);
    for (const auto& r : search.roots) {
        std::cout << "root E = " << format_real(r.energy, 10) << "  multiplicity " << r.multiplicity
                  << "  width " << format_real(r.width, 3) << "\n";
    }
    for (const auto& r : search.rejected) {
        std::cout << "rejected E = " << format_real(r.energy, 10) << "  width " << format_real(r.width, 3) << "\n";
    }
    for (const auto& w : search.warnings) std::cerr << "warning: " << w << "\n";
    if (search.total_multiplicity() == 2) {
        const auto rp = rabi_period(search.roots);
        if (rp.divergent) std::cout << "degenerate pair: no Rabi oscillation\n";
        else std::cout << "Rabi period 2 pi/(E1 - E2) = " << format_real(rp.period, 8) << "\n";
    }
    std::cout << "lattice BICs: " << lattice.count(StateClass::bic) << "\n";
    report_files(c.out_dir(), {{"bic.json", bic_json(cfg, search, lattice)}});
    return 0;
}

int cmd_dynamics(const Common& c) {
    const Scenario s = c.load();
    const auto& cfg = s.run.system;
    const TimeGrid grid = s.run.grid();
    const AtomTrajectory tr = solve_volterra(cfg, initial_state(s.initial, cfg), grid);
    const EigenTrace trace = m_eigenvalues_trace(cfg, grid);
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.output_every / grid.dt())));
    const std::size_t last = tr.size() - 1;
    std::cout << "t = " << format_real(tr.times[last], 8) << "  pop1 = " << format_real(tr.population_1(last), 6)
              << "  pop2 = " << format_real(tr.population_2(last), 6) << "\n";
    const Plateau p = detect_plateau(tr);
    if (p.reached) {
        std::cout << "plateau from t = " << format_real(p.time, 6) << ": " << format_real(p.population_1, 6) << ", "
                  << format_real(p.population_2, 6) << "\n";
    }
    report_files(c.out_dir(), {{"dynamics.csv", dynamics_csv(tr, stride)}, {"mtrace.csv", mtrace_csv(trace, stride)}});
    return 0;
}

int cmd_field(const Common& c, std::optional<int> lo, std::optional<int> hi, std::vector<double> times) {
    const Scenario s = c.load();
    const auto& cfg = s.run.system;
    const TimeGrid grid = s.run.grid();
    const AtomTrajectory tr = solve_volterra(cfg, initial_state(s.initial, cfg), grid);
    auto [w_lo, w_hi] = s.field_window();
    if (lo) w_lo = *lo;
    if (hi) w_hi = *hi;
    if (times.empty()) {
        for (double t = 0.0; t <= grid.last_time() + 1e-9; t += s.field_every) times.push_back(t);
    }
    const auto snaps = photon_field(cfg, tr, w_lo, w_hi, times);
    for (const auto& snap : snaps) {
        std::cout << "t = " << format_real(snap.time, 8) << "  window weight " << format_real(snap.total_weight(), 6)
                  << "\n";
    }
    report_files(c.out_dir(), {{"field.csv", field_csv(snaps)}});
    return 0;
}

int cmd_census(const Common& c, const std::vector<int>& sizes, std::vector<int> deltas, double g) {
    SystemConfig base;
    base.g_1 = base.g_2 = g;
    RootOptions ro;
    if (c.n_c) ro.lattice_n_c = *c.n_c;
    std::vector<CensusRow> rows;
    for (int n : sizes) {
        // Without --deltas: every offset up to N - 1.
        std::vector<int> ds = deltas;
        if (ds.empty())
            for (int d = 1; d < n; ++d) ds.push_back(d);
        auto part = bic_census(n, ds, g, base, ro, c.workers);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    for (const auto& row : rows) {
        std::cout << "N = " << row.size << "  delta = " << row.delta << "  roots " << row.search.total_multiplicity();
        for (const auto& r : row.search.roots) std::cout << "  " << format_real(r.energy, 6) << "(x" << r.multiplicity << ")";
        if (row.lattice_bic_count) std::cout << "  lattice " << *row.lattice_bic_count;
        std::cout << "\n";
    }
    report_files(c.out_dir(), {{"census.csv", census_csv(rows)}});
    return 0;
}

int cmd_sweep(const Common& c, const std::string& key_name, const std::vector<double>& values, bool dynamics) {
    const auto key = parse_sweep_key(key_name);
    if (!key) throw ConfigError("--vary must be one of delta, N, g, dt (got '" + key_name + "')");
    const Scenario s = c.load();
    SweepOptions so;
    so.workers = c.workers;
    so.dynamics = dynamics;
    const auto rows = sweep(s.run, *key, values, so);
    for (const auto& row : rows) {
        std::cout << key_name << " = " << format_real(row.value, 8) << "  roots " << row.search.total_multiplicity();
        if (row.lattice_bic_count) std::cout << "  lattice " << *row.lattice_bic_count;
        if (row.plateau && row.plateau->reached)
            std::cout << "  plateau " << format_real(row.plateau->population_1, 5) << ", "
                      << format_real(row.plateau->population_2, 5);
        std::cout << "\n";
    }
    report_files(c.out_dir(), {{"sweep.csv", sweep_csv(*key, rows)}});
    return 0;
}

int cmd_run(const Common& c, bool check) {
    const Scenario s = c.load();
    RunOptions ro;
    ro.workers = c.workers;
    const fs::path dir = c.out_dir();
    const ScenarioReport rep = run_scenario(s, dir, ro);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& ch : rep.checks) {
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << "  value " << format_real(ch.value, 6)
                  << "  limit " << format_real(ch.limit, 6) << "  " << ch.detail << "\n";
    }
    std::cout << rep.files.size() << " files in " << dir.string() << " (" << format_real(rep.wall_seconds, 4)
              << " s)\n";
    return check && !rep.all_passed() ? kExitCheck : 0;
}

}  // namespace

namespace giantbic::cli {

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    return kExitSolver;
}

int run(int argc, char** argv) {
    CLI::App app{"Bound states in the continuum of two giant atoms on a coupled-resonator waveguide"};
    app.set_version_flag("--version", giantbic::library_version());
    app.require_subcommand(1);

    Common common;

    auto* spectrum = app.add_subcommand("spectrum", "Finite-lattice eigenstates and BIC/BOC classification");
    add_common(spectrum, common, false);

    auto* bic = app.add_subcommand("bic", "Closed-form bound-state roots with lattice cross-check");
    add_common(bic, common, false);

    auto* dynamics = app.add_subcommand("dynamics", "Atomic populations and M(t) eigenvalue trace");
    add_common(dynamics, common, true);

    std::optional<int> field_lo, field_hi;
    std::vector<double> field_times;
    auto* field = app.add_subcommand("field", "Photon field in real space");
    add_common(field, common, true);
    field->add_option("--lo", field_lo, "First waveguide site");
    field->add_option("--hi", field_hi, "Last waveguide site");
    field->add_option("--times", field_times, "Snapshot times (comma separated)")->delimiter(',');

    std::vector<int> census_sizes{6, 8};
    std::vector<int> census_deltas;
    double census_g = 0.1;
    auto* census = app.add_subcommand("census", "Bound-state census over atom sizes and separations");
    census->add_option("--N", census_sizes, "Atom sizes")->delimiter(',')->capture_default_str();
    census->add_option("--deltas", census_deltas, "Leg offsets m_1 - n_1 (default 1..N-1)")->delimiter(',');
    census->add_option("--g", census_g, "Coupling strength")->capture_default_str();
    census->add_option("--out", common.out, "Output directory");
    census->add_option("--nc", common.n_c, "Lattice size of the cross-check");
    census->add_option("--workers", common.workers, "Worker threads")->capture_default_str();

    std::string sweep_key;
    std::vector<double> sweep_values;
    bool sweep_dynamics = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Vary one parameter and summarize");
    add_common(sweep_cmd, common, true);
    sweep_cmd->add_option("--vary", sweep_key, "delta | N | g | dt")->required();
    sweep_cmd->add_option("--values", sweep_values, "Values (comma separated)")->delimiter(',');
    sweep_cmd->add_flag("--dynamics", sweep_dynamics, "Also integrate the populations");

    bool run_check = false;
    auto* run = app.add_subcommand("run", "Run a preset or config file end to end");
    add_common(run, common, true);
    run->add_flag("--check", run_check, "Exit with status 3 when any check fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*spectrum) return cmd_spectrum(common);
        if (*bic) return cmd_bic(common);
        if (*dynamics) return cmd_dynamics(common);
        if (*field) return cmd_field(common, field_lo, field_hi, field_times);
        if (*census) return cmd_census(common, census_sizes, census_deltas, census_g);
        if (*sweep_cmd) return cmd_sweep(common, sweep_key, sweep_values, sweep_dynamics);
        if (*run) return cmd_run(common, run_check);
    } catch (const giantbic::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const giantbic::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}

}  // namespace giantbic::cli
