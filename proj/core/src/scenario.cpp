#include "giantbic/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <system_error>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>

#include "giantbic/csv.hpp"

namespace giantbic {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kTraceTol = 1e-3;      // |Im lambda| counted as zero
constexpr double kExactTol = 1e-2;      // Volterra vs lattice populations
constexpr double kExactNormTol = 1e-10;
constexpr double kFieldNormTol = 1e-2;
constexpr double kPeriodTol = 0.02;
constexpr double kNoDecayMin = 0.9;
constexpr double kPlateauGap = 1e-2;
constexpr double kPlateauRel = 0.05;
constexpr double kDecayMax = 0.05;
constexpr double kDecayTime = 400.0;
constexpr double kOffPeakMax = 0.1;
constexpr double kSettleTime = 400.0;  // dynamics checks need runs at least this long

SystemConfig legs(int n1, int n2, int m1, int m2) {
    SystemConfig c;
    c.n_1 = n1;
    c.n_2 = n2;
    c.m_1 = m1;
    c.m_2 = m2;
    return c;
}

Scenario trace_preset(std::string name, SystemConfig cfg) {
    Scenario s;
    s.name = std::move(name);
    s.run.system = cfg;
    s.run.t_max = 200.0;
    s.run.dt = 0.02;
    s.run.n_c = 600;
    return s;
}

std::size_t stride_for(double every, double dt) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(every / dt)));
}

json config_json(const RunConfig& run) {
    const auto& c = run.system;
    return json{{"omega_c", c.omega_c}, {"xi", c.xi},     {"omega_1", c.omega_1}, {"omega_2", c.omega_2},
                {"g_1", c.g_1},         {"g_2", c.g_2},   {"n_1", c.n_1},         {"n_2", c.n_2},
                {"m_1", c.m_1},         {"m_2", c.m_2},   {"t_max", run.t_max},   {"dt", run.dt},
                {"n_c", run.n_c}};
}

json root_json(const BicRoot& r) {
    json branches = json::array();
    for (Branch b : r.branches) branches.push_back(to_string(b));
    json j{{"energy", r.energy},
           {"multiplicity", r.multiplicity},
           {"branches", branches},
           {"chi", {r.chi.real(), r.chi.imag()}},
           {"width", r.width}};
    if (r.localized) j["localized"] = *r.localized;
    return j;
}

json search_json(const RootSearch& search) {
    json roots = json::array(), rejected = json::array();
    for (const auto& r : search.roots) roots.push_back(root_json(r));
    for (const auto& r : search.rejected) rejected.push_back(root_json(r));
    json j{{"roots", roots},
           {"total_multiplicity", search.total_multiplicity()},
           {"rejected", rejected},
           {"warnings", search.warnings}};
    if (search.total_multiplicity() == 2) {
        const auto rp = rabi_period(search.roots);
        j["rabi_period"] = rp.divergent ? json(nullptr) : json(rp.period);
        j["degenerate"] = rp.divergent;
    }
    return j;
}

std::string fmt(double v) { return format_real(v, 6); }

Check make_check(std::string name, bool passed, double value, double limit, std::string detail) {
    return {std::move(name), passed, value, limit, std::move(detail)};
}

// Splits the snapshot times over workers; each call rebuilds its own Bessel rows.
std::vector<FieldSnapshot> field_parallel(const SystemConfig& cfg, const AtomTrajectory& tr, int lo, int hi,
                                          const std::vector<double>& times, unsigned workers) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(times.size())));
    if (workers <= 1 || times.size() < 2) return photon_field(cfg, tr, lo, hi, times);
    std::vector<std::future<std::vector<FieldSnapshot>>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        std::vector<double> mine;
        for (std::size_t i = w; i < times.size(); i += workers) mine.push_back(times[i]);
        jobs.push_back(std::async(std::launch::async, [&, mine] { return photon_field(cfg, tr, lo, hi, mine); }));
    }
    std::vector<FieldSnapshot> out(times.size());
    for (unsigned w = 0; w < workers; ++w) {
        auto part = jobs[w].get();
        for (std::size_t k = 0; k < part.size(); ++k) out[w + k * workers] = std::move(part[k]);
    }
    return out;
}

std::vector<double> expand(const std::vector<BicRoot>& roots) {
    std::vector<double> e;
    for (const auto& r : roots)
        for (int k = 0; k < r.multiplicity; ++k) e.push_back(r.energy);
    std::sort(e.begin(), e.end());
    return e;
}

// Bound-state energies known for the two atom sizes of the census preset.
std::optional<std::vector<double>> known_census_row(int size, int delta) {
    if (size == 6) return delta % 2 ? std::vector<double>{-0.0097, 0.0097} : std::vector<double>{0.0, 0.0};
    if (size == 8) return delta % 2 ? std::vector<double>{} : std::vector<double>{0.0};
    return std::nullopt;
}

void run_census(const Scenario& sc, const RunOptions& opts, ScenarioReport& rep,
                std::map<std::string, std::string>& files) {
    std::vector<CensusRow> rows;
    RootOptions ro;
    ro.lattice_n_c = sc.run.n_c;
    for (const auto& [size, deltas] : sc.census) {
        auto part = bic_census(size, deltas, sc.run.system.g_1, sc.run.system, ro, opts.workers);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    files["census.csv"] = census_csv(rows);

    json jrows = json::array();
    double worst = 0.0;
    bool roots_ok = true, lattice_ok = true;
    std::ostringstream bad_roots, bad_lattice;
    for (const auto& row : rows) {
        json j = search_json(row.search);
        j = json{{"N", row.size}, {"delta", row.delta}, {"search", j}};
        if (row.lattice_bic_count) j["lattice_bic_count"] = *row.lattice_bic_count;
        jrows.push_back(j);

        if (auto want = known_census_row(row.size, row.delta)) {
            const auto got = expand(row.search.roots);
            bool ok = got.size() == want->size();
            for (std::size_t k = 0; ok && k < got.size(); ++k) {
                const double err = std::abs(got[k] - (*want)[k]);
                const double tol = (*want)[k] == 0.0 ? 1e-6 : 1e-3;
                worst = std::max(worst, err);
                ok = err <= tol;
            }
            if (!ok) {
                roots_ok = false;
                bad_roots << " (N=" << row.size << ",delta=" << row.delta << ")";
            }
        }
        const auto mult = static_cast<std::size_t>(row.search.total_multiplicity());
        if (!row.lattice_bic_count || *row.lattice_bic_count != mult) {
            lattice_ok = false;
            bad_lattice << " (N=" << row.size << ",delta=" << row.delta << ")";
        }
    }
    files["bic.json"] = json{{"config", config_json(sc.run)}, {"census", jrows}}.dump(2);

    rep.checks.push_back(make_check("table1_roots", roots_ok, worst, 1e-3,
                                    roots_ok ? "all rows match" : "mismatch:" + bad_roots.str()));
    rep.checks.push_back(make_check("table1_lattice_counts", lattice_ok, 0.0, 0.0,
                                    lattice_ok ? "lattice BIC count equals root count in every row"
                                               : "mismatch:" + bad_lattice.str()));
}

void run_dynamics(const Scenario& sc, const RunOptions& opts, ScenarioReport& rep,
                  std::map<std::string, std::string>& files) {
    const SystemConfig cfg = validate_config(sc.run.system);
    const TimeGrid grid = sc.run.grid();
    const WavefunctionState psi0 = initial_state(sc.initial, cfg);
    const unsigned workers = std::max(1u, opts.workers);

    // Finite lattice first: the BIC classification also serves the root cross-check.
    const int n_c = std::max(sc.run.n_c, minimum_lattice_size(cfg));
    auto spectrum_job = std::async(std::launch::async, [&] {
        return classify_bound_states(eigendecompose(build_hamiltonian(cfg, n_c)), cfg);
    });

    // Memory-kernel solution and the M(t) trace share the kernel tables.
    const KernelSet kernels = build_kernels(cfg, grid);
    auto trace_job = std::async(std::launch::async, [&] { return m_eigenvalues_trace(cfg, grid); });
    const AtomTrajectory traj = solve_volterra(cfg, psi0, grid, kernels);

    const Classification lattice = spectrum_job.get();
    const std::size_t bic_count = lattice.count(StateClass::bic);

    std::optional<RootSearch> search;
    if (cfg.is_symmetric()) {
        RootOptions ro;
        ro.lattice_n_c = 0;
        search = find_bic_roots(cfg, ro);
        cross_check_with_lattice(*search, lattice, cfg);
        const auto mult = static_cast<std::size_t>(search->total_multiplicity());
        rep.checks.push_back(make_check("lattice_matches_roots", mult == bic_count, static_cast<double>(bic_count),
                                        static_cast<double>(mult),
                                        "lattice BICs " + std::to_string(bic_count) + ", roots " +
                                            std::to_string(mult)));
    } else {
        rep.warnings.push_back("asymmetric configuration: closed-form root search skipped");
    }

    // Spectrum artifacts.
    files["spectrum.csv"] = spectrum_csv(lattice);
    for (const auto& s : lattice.states) {
        if (s.kind != StateClass::extended) files["profile_" + std::to_string(s.index) + ".csv"] = profile_csv(lattice, s.index);
    }
    files["bic.json"] = search ? bic_json(cfg, *search, lattice) : bic_json(cfg, RootSearch{}, lattice);

    // Wide-window field audits of the norm, and the heat-map field.
    const double t_end = grid.last_time();
    std::vector<double> audit_times;
    for (double t = sc.norm_every; t < t_end - 1e-9; t += sc.norm_every) audit_times.push_back(t);
    audit_times.push_back(t_end);
    const auto [wide_lo, wide_hi] = radiation_window(cfg, t_end);
    const auto audits = field_parallel(cfg, traj, wide_lo, wide_hi, audit_times, workers);
    std::map<std::size_t, double> deficits;
    double worst_deficit = 0.0;
    bool window_ok = true;
    for (const auto& snap : audits) {
        const auto nc = norm_check(cfg, traj, snap);
        deficits[grid.nearest_index(snap.time)] = nc.deficit;
        worst_deficit = std::max(worst_deficit, nc.deficit);
        window_ok = window_ok && nc.window_ok;
    }
    deficits[0] = std::abs(1.0 - traj.population_1(0) - traj.population_2(0));
    rep.checks.push_back(make_check("volterra_field_norm", window_ok && worst_deficit <= kFieldNormTol, worst_deficit,
                                    kFieldNormTol,
                                    "max deficit over " + std::to_string(audits.size()) + " wide-window audits"));

    const auto [heat_lo, heat_hi] = sc.field_window();
    std::vector<double> heat_times;
    const std::size_t heat_stride = stride_for(sc.field_every, grid.dt());
    for (std::size_t n = 0; n < grid.nodes(); n += heat_stride) heat_times.push_back(grid.time(n));
    if (heat_times.back() < t_end - 1e-9) heat_times.push_back(t_end);
    const auto heat = field_parallel(cfg, traj, heat_lo, heat_hi, heat_times, workers);
    files["field.csv"] = field_csv(heat);

    const std::size_t out_stride = stride_for(sc.output_every, grid.dt());
    files["dynamics.csv"] = dynamics_csv(traj, out_stride, deficits);

    const EigenTrace trace = trace_job.get();
    files["mtrace.csv"] = mtrace_csv(trace, out_stride);

    // M(t) eigenvalues at the judging time: as many near-zero imaginary parts
    // as lattice BICs, the rest clearly decaying.
    {
        const std::size_t n = grid.nearest_index(std::min(sc.trace_late, t_end));
        const double im[2] = {trace.lambda_1[n].imag(), trace.lambda_2[n].imag()};
        std::size_t near_zero = 0;
        bool others_decay = true;
        for (double v : im) {
            if (std::abs(v) <= kTraceTol) ++near_zero;
            else others_decay = others_decay && v <= -kTraceTol;
        }
        const bool ok = near_zero == std::min<std::size_t>(bic_count, 2) && others_decay;
        rep.checks.push_back(make_check("mtrace_late_imag", ok, std::max(std::abs(im[0]), std::abs(im[1])), kTraceTol,
                                        "t=" + fmt(grid.time(n)) + " Im lambda = " + fmt(im[0]) + ", " + fmt(im[1]) +
                                            "; near-zero traces " + std::to_string(near_zero) + ", lattice BICs " +
                                            std::to_string(bic_count)));
    }

    // Exact lattice reference.
    if (sc.exact_reference) {
        ExactOptions eo;
        eo.norm_stride = 25;
        const ExactResult ex = exact_propagate(lattice.basis, cfg, psi0, grid, eo);
        for (const auto& w : ex.warnings) rep.warnings.push_back(w);
        double diff = 0.0;
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            diff = std::max({diff, std::abs(traj.population_1(k) - ex.trajectory.population_1(k)),
                             std::abs(traj.population_2(k) - ex.trajectory.population_2(k))});
        }
        rep.checks.push_back(make_check("volterra_vs_exact", diff <= kExactTol && ex.wavefront_ok, diff, kExactTol,
                                        "n_c=" + std::to_string(n_c) +
                                            (ex.wavefront_ok ? "" : "; lattice below the wavefront size")));
        rep.checks.push_back(make_check("exact_norm", ex.max_norm_deficit <= kExactNormTol, ex.max_norm_deficit,
                                        kExactNormTol, "site-basis norm audit every 25 steps"));
    }

    // BIC count against the long-time dynamics.
    const bool single_atom = psi0.photon_vacuum() &&
                             (sc.initial == AtomSelector::atom1 || sc.initial == AtomSelector::atom2);
    if (t_end >= kSettleTime) {
        if (bic_count >= 2) {
            double avg = 0.0;
            std::size_t cnt = 0;
            for (std::size_t k = grid.nodes() / 2; k < grid.nodes(); ++k, ++cnt)
                avg += traj.population_1(k) + traj.population_2(k);
            avg /= static_cast<double>(std::max<std::size_t>(cnt, 1));
            rep.checks.push_back(make_check("two_bic_no_decay", avg >= kNoDecayMin, avg, kNoDecayMin,
                                            "mean of pop1+pop2 over the second half of the run"));
            if (search && search->total_multiplicity() == 2) {
                const auto rp = rabi_period(search->roots);
                const auto measured = oscillation_period(traj);
                if (!rp.divergent && measured) {
                    const double rel = std::abs(*measured - rp.period) / rp.period;
                    rep.checks.push_back(make_check("rabi_period", rel <= kPeriodTol, rel, kPeriodTol,
                                                    "measured " + fmt(*measured) + ", predicted " + fmt(rp.period)));
                }
            }
        } else if (bic_count == 1 && single_atom) {
            const Plateau p = detect_plateau(traj);
            const SteadyState pred = steady_state_prediction(lattice, psi0);
            const double gap = std::abs(p.population_1 - p.population_2);
            rep.checks.push_back(make_check("plateau_symmetric", p.reached && gap <= kPlateauGap, gap, kPlateauGap,
                                            p.reached ? "plateau from t=" + fmt(p.time) : "no plateau reached"));
            const double rel = std::max(std::abs(p.population_1 - pred.population_1) / pred.population_1,
                                        std::abs(p.population_2 - pred.population_2) / pred.population_2);
            rep.checks.push_back(make_check("plateau_prediction", p.reached && rel <= kPlateauRel, rel, kPlateauRel,
                                            "plateau " + fmt(p.population_1) + ", " + fmt(p.population_2) +
                                                "; predicted " + fmt(pred.population_1) + ", " +
                                                fmt(pred.population_2)));
        } else if (bic_count == 0) {
            const std::size_t n = grid.nearest_index(kDecayTime);
            const double left = traj.population_1(n) + traj.population_2(n);
            rep.checks.push_back(make_check("zero_bic_decay", left <= kDecayMax, left, kDecayMax,
                                            "pop1+pop2 at t=" + fmt(grid.time(n))));
        }
    }

    if (!sc.field_peaks.empty()) {
        const FieldSnapshot& last = audits.back();
        const double frac = off_peak_fraction(last, cfg.leftmost_leg(), cfg.rightmost_leg(), sc.field_peaks);
        std::string peaks;
        for (int p : sc.field_peaks) peaks += (peaks.empty() ? "" : ",") + std::to_string(p);
        rep.checks.push_back(make_check("residual_field_sites", frac <= kOffPeakMax, frac, kOffPeakMax,
                                        "weight off sites {" + peaks + "} (+-1) at t=" + fmt(last.time)));
    }
}

std::string manifest_json(const Scenario& sc, const ScenarioReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back(json{{"name", c.name},
                              {"passed", c.passed},
                              {"value", c.value},
                              {"limit", c.limit},
                              {"detail", c.detail}});
    }
    json j{{"scenario", sc.name},
           {"kind", sc.kind == ScenarioKind::census ? "census" : "dynamics"},
           {"initial", to_string(sc.initial)},
           {"config", config_json(sc.run)},
           {"config_text", format_config(sc.run)},
           {"versions",
            {{"giantbic", library_version()},
             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                           std::to_string(EIGEN_MINOR_VERSION)},
             {"compiler", __VERSION__}}},
           {"wall_seconds", rep.wall_seconds},
           {"files", rep.files},
           {"warnings", rep.warnings},
           {"checks", checks},
           {"all_passed", rep.all_passed()}};
    return j.dump(2);
}

}  // namespace

std::string library_version() { return GIANTBIC_VERSION; }

std::pair<int, int> Scenario::field_window() const noexcept {
    if (field_hi >= field_lo) return {field_lo, field_hi};
    const int lo = std::min(run.system.n_1, run.system.m_1);
    const int hi = std::max(run.system.n_2, run.system.m_2);
    return {lo - 10, hi + 10};
}

std::vector<std::string> preset_names() {
    return {"fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "table1"};
}

std::optional<Scenario> preset(std::string_view name) {
    if (name == "fig2a") return trace_preset("fig2a", legs(1, 7, 4, 10));
    if (name == "fig2b") return trace_preset("fig2b", legs(1, 7, 3, 9));
    if (name == "fig2c") return trace_preset("fig2c", legs(1, 9, 4, 12));
    if (name == "fig2d") return trace_preset("fig2d", legs(1, 9, 3, 11));
    if (name == "fig3") {
        Scenario s = trace_preset("fig3", legs(1, 7, 4, 10));
        s.run.t_max = 700.0;
        s.run.n_c = 1600;
        s.exact_reference = true;
        return s;
    }
    if (name == "fig4") {
        Scenario s = trace_preset("fig4", legs(1, 9, 3, 11));
        s.run.t_max = 600.0;
        s.run.n_c = 1400;
        s.exact_reference = true;
        s.field_peaks = {2, 10};
        return s;
    }
    if (name == "table1") {
        Scenario s = trace_preset("table1", legs(1, 7, 4, 10));
        s.kind = ScenarioKind::census;
        s.census = {{6, {1, 2, 3, 4, 5}}, {8, {1, 2, 3, 4, 5, 6, 7}}};
        return s;
    }
    return std::nullopt;
}

Scenario load_scenario(std::string_view preset_or_path) {
    if (auto p = preset(preset_or_path)) return *p;
    const fs::path path{std::string(preset_or_path)};
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        std::string names;
        for (const auto& n : preset_names()) names += " " + n;
        throw ConfigError("'" + std::string(preset_or_path) + "' is neither a preset (" + names.substr(1) +
                          ") nor a readable config file");
    }
    Scenario s;
    s.name = path.stem().string();
    s.run = load_config(path);
    return s;
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("GIANTBIC_OUT"); env && *env) return fs::path(env);
    return fs::path("giantbic-out");
}

std::string spectrum_csv(const Classification& lattice) {
    CsvTable t({"index", "energy", "class", "ipr", "a1_sq", "a2_sq"});
    for (const auto& s : lattice.states) {
        t.row().cell(s.index).cell(s.energy).cell(to_string(s.kind)).cell(s.ipr).cell(s.a1 * s.a1).cell(s.a2 * s.a2);
    }
    return t.str();
}

std::string profile_csv(const Classification& lattice, std::size_t index) {
    if (index >= lattice.basis.size()) throw ConfigError("profile_csv: state index out of range");
    CsvTable t({"site", "prob"});
    for (const auto& sp : photon_profile(lattice.basis.pair(index), lattice.basis.site_offset)) {
        t.row().cell(sp.site).cell(sp.prob);
    }
    return t.str();
}

std::string bic_json(const SystemConfig& cfg, const RootSearch& search, const std::optional<Classification>& lattice) {
    RunConfig run;
    run.system = cfg;
    json j = config_json(run);
    for (const char* k : {"t_max", "dt", "n_c"}) j.erase(k);
    json out{{"config", j}, {"symmetric", cfg.is_symmetric()}, {"search", search_json(search)}};
    if (lattice) {
        json states = json::array();
        for (const auto& s : lattice->states) {
            if (s.kind == StateClass::extended && !s.ambiguous) continue;
            states.push_back(json{{"index", s.index},
                                  {"energy", s.energy},
                                  {"class", to_string(s.kind)},
                                  {"ipr", s.ipr},
                                  {"window_weight", s.window_weight},
                                  {"a1", s.a1},
                                  {"a2", s.a2},
                                  {"ambiguous", s.ambiguous}});
        }
        out["lattice"] = json{{"n_c", lattice->basis.n_c},
                              {"bic_count", lattice->count(StateClass::bic)},
                              {"boc_count", lattice->count(StateClass::boc)},
                              {"states", states}};
    }
    return out.dump(2);
}

std::string dynamics_csv(const AtomTrajectory& tr, std::size_t stride, const std::map<std::size_t, double>& deficits) {
    stride = std::max<std::size_t>(stride, 1);
    CsvTable t({"t", "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "pop1", "pop2", "norm_deficit"});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto it = deficits.find(k);
        if (k % stride != 0 && k + 1 != tr.size() && it == deficits.end()) continue;
        t.row()
            .cell(tr.times[k])
            .cell(tr.alpha_1[k].real())
            .cell(tr.alpha_1[k].imag())
            .cell(tr.alpha_2[k].real())
            .cell(tr.alpha_2[k].imag())
            .cell(tr.population_1(k))
            .cell(tr.population_2(k));
        if (it != deficits.end()) t.cell(it->second);
        else t.cell("");
    }
    return t.str();
}

std::string field_csv(const std::vector<FieldSnapshot>& snapshots) {
    CsvTable t({"t", "site", "prob"});
    for (const auto& s : snapshots) {
        for (std::size_t q = 0; q < s.beta.size(); ++q) {
            t.row().cell(s.time).cell(s.first_site + static_cast<int>(q)).cell(std::norm(s.beta[q]));
        }
    }
    return t.str();
}

std::string mtrace_csv(const EigenTrace& trace, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    CsvTable t({"t", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2"});
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        if (k % stride != 0 && k + 1 != trace.times.size()) continue;
        t.row()
            .cell(trace.times[k])
            .cell(trace.lambda_1[k].real())
            .cell(trace.lambda_1[k].imag())
            .cell(trace.lambda_2[k].real())
            .cell(trace.lambda_2[k].imag());
    }
    return t.str();
}

std::string census_csv(const std::vector<CensusRow>& rows) {
    CsvTable t({"N", "delta", "roots", "E1", "E2", "max_width", "lattice_bics", "rejected"});
    for (const auto& row : rows) {
        const auto e = expand(row.search.roots);
        double width = 0.0;
        for (const auto& r : row.search.roots) width = std::max(width, r.width);
        t.row().cell(row.size).cell(row.delta).cell(row.search.total_multiplicity());
        for (std::size_t k = 0; k < 2; ++k) {
            if (k < e.size()) t.cell(e[k]);
            else t.cell("");
        }
        t.cell(width);
        if (row.lattice_bic_count) t.cell(*row.lattice_bic_count);
        else t.cell("");
        t.cell(row.search.rejected.size());
    }
    return t.str();
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir, ec)) {
        throw ConfigError("output directory '" + dir.string() + "' cannot be created" +
                          (ec ? ": " + ec.message() : std::string{}));
    }
    const fs::path probe = dir / ".giantbic-probe";
    {
        std::ofstream out(probe, std::ios::trunc);
        if (!out || !(out << "probe")) {
            throw ConfigError("output directory '" + dir.string() + "' is not writable");
        }
    }
    fs::remove(probe, ec);
}

void write_artifacts(const fs::path& dir, const std::map<std::string, std::string>& files) {
    ensure_writable(dir);
    std::vector<fs::path> staged, placed;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& p : staged) fs::remove(p, ec);
        for (const auto& p : placed) fs::remove(p, ec);
    };
    try {
        for (const auto& [name, body] : files) {
            const fs::path part = dir / (name + ".part");
            staged.push_back(part);
            write_text_file(part, body);
        }
        for (const auto& [name, body] : files) {
            const fs::path part = dir / (name + ".part");
            fs::rename(part, dir / name);
            placed.push_back(dir / name);
            staged.erase(std::find(staged.begin(), staged.end(), part));
        }
    } catch (const fs::filesystem_error& e) {
        cleanup();
        throw ConfigError(std::string("writing artifacts failed: ") + e.what());
    } catch (...) {
        cleanup();
        throw;
    }
}

std::optional<double> oscillation_period(const AtomTrajectory& tr) {
    if (tr.size() < 3) return std::nullopt;
    double lo = tr.population_1(0), hi = lo;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        lo = std::min(lo, tr.population_1(k));
        hi = std::max(hi, tr.population_1(k));
    }
    const double level = 0.5 * (lo + hi);
    std::vector<double> crossings;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const double a = tr.population_1(k - 1) - level;
        const double b = tr.population_1(k) - level;
        if ((a < 0.0) != (b < 0.0)) {
            const double s = a / (a - b);
            crossings.push_back(tr.times[k - 1] + s * (tr.times[k] - tr.times[k - 1]));
        }
    }
    if (crossings.size() < 3) return std::nullopt;
    // Consecutive crossings are half a period apart.
    return 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

double off_peak_fraction(const FieldSnapshot& field, int lo, int hi, std::span<const int> peaks) {
    double total = 0.0, off = 0.0;
    for (int j = std::max(lo, field.first_site); j <= std::min(hi, field.last_site()); ++j) {
        const double w = std::norm(field.beta[static_cast<std::size_t>(j - field.first_site)]);
        total += w;
        const bool near = std::any_of(peaks.begin(), peaks.end(), [j](int p) { return std::abs(j - p) <= 1; });
        if (!near) off += w;
    }
    return total > 0.0 ? off / total : 0.0;
}

bool ScenarioReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ScenarioReport::find(std::string_view check_name) const noexcept {
    for (const auto& c : checks)
        if (c.name == check_name) return &c;
    return nullptr;
}

ScenarioReport run_scenario(const Scenario& sc, const fs::path& dir, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (opts.write) ensure_writable(dir);

    ScenarioReport rep;
    rep.name = sc.name;
    std::map<std::string, std::string> files;
    try {
        if (sc.kind == ScenarioKind::census) run_census(sc, opts, rep, files);
        else run_dynamics(sc, opts, rep, files);
    } catch (const SolverError& e) {
        throw SolverError("scenario '" + sc.name + "': " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("scenario '" + sc.name + "': " + e.what());
    }

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& [name, body] : files) rep.files.push_back(name);
    rep.files.push_back("manifest.json");
    std::sort(rep.files.begin(), rep.files.end());
    files["manifest.json"] = manifest_json(sc, rep);
    if (opts.write) write_artifacts(dir, files);
    return rep;
}

std::optional<SweepKey> parse_sweep_key(std::string_view key) {
    if (key == "delta") return SweepKey::delta;
    if (key == "N") return SweepKey::size;
    if (key == "g") return SweepKey::g;
    if (key == "dt") return SweepKey::dt;
    return std::nullopt;
}

std::string to_string(SweepKey key) {
    switch (key) {
        case SweepKey::delta: return "delta";
        case SweepKey::size: return "N";
        case SweepKey::g: return "g";
        case SweepKey::dt: return "dt";
    }
    return "?";
}

namespace {

int integer_value(double v, SweepKey key) {
    if (!std::isfinite(v) || v != std::round(v)) {
        throw ConfigError("sweep: " + to_string(key) + " values must be integers, got " + format_real(v));
    }
    return static_cast<int>(v);
}

SweepRow sweep_one(const RunConfig& base, SweepKey key, double value, const SweepOptions& opts) {
    RunConfig run = base;
    SystemConfig& c = run.system;
    switch (key) {
        case SweepKey::delta: c = with_geometry(c, c.size_1(), integer_value(value, key)); break;
        case SweepKey::size: c = with_geometry(c, integer_value(value, key), c.offset()); break;
        case SweepKey::g: c.g_1 = c.g_2 = value; break;
        case SweepKey::dt: run.dt = value; break;
    }
    c = validate_config(c);

    SweepRow row;
    row.value = value;
    row.config = c;
    RootOptions ro = opts.roots;
    ro.lattice_n_c = 0;
    row.search = find_bic_roots(c, ro);
    if (run.n_c > 0) {
        const int n_c = std::max(run.n_c, minimum_lattice_size(c));
        const Classification lattice = classify_bound_states(eigendecompose(build_hamiltonian(c, n_c)), c);
        cross_check_with_lattice(row.search, lattice, c);
        row.lattice_bic_count = lattice.count(StateClass::bic);
    }
    if (opts.dynamics) {
        const AtomTrajectory tr = solve_volterra(c, initial_state(AtomSelector::atom1, c), run.grid());
        row.plateau = detect_plateau(tr);
        row.final_population_1 = tr.population_1(tr.size() - 1);
        row.final_population_2 = tr.population_2(tr.size() - 1);
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& base, SweepKey key, std::span<const double> values,
                            const SweepOptions& opts) {
    std::vector<SweepRow> rows(values.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(values.size())));
    if (values.empty()) return rows;
    std::vector<std::exception_ptr> errors(values.size());
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < values.size(); i += workers) {
                try {
                    rows[i] = sweep_one(base, key, values[i], opts);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        }));
    }
    for (auto& j : jobs) j.get();
    // Report the first failing value in input order.
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::string sweep_csv(SweepKey key, const std::vector<SweepRow>& rows) {
    const std::string k = to_string(key);
    CsvTable t({k, "N", "delta", "g", "roots", "E1", "E2", "lattice_bics", "plateau_reached", "plateau_pop1",
                "plateau_pop2", "final_pop1", "final_pop2"});
    for (const auto& row : rows) {
        const auto e = expand(row.search.roots);
        t.row()
            .cell(row.value)
            .cell(row.config.size_1())
            .cell(row.config.offset())
            .cell(row.config.g_1)
            .cell(row.search.total_multiplicity());
        for (std::size_t q = 0; q < 2; ++q) {
            if (q < e.size()) t.cell(e[q]);
            else t.cell("");
        }
        if (row.lattice_bic_count) t.cell(*row.lattice_bic_count);
        else t.cell("");
        if (row.plateau) {
            t.cell(row.plateau->reached ? "yes" : "no").cell(row.plateau->population_1).cell(row.plateau->population_2);
            t.cell(row.final_population_1).cell(row.final_population_2);
        } else {
            t.cell("").cell("").cell("").cell("").cell("");
        }
    }
    return t.str();
}

}  // namespace giantbic
