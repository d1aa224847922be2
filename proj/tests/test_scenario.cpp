#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "giantbic/csv.hpp"
#include "giantbic/scenario.hpp"

using namespace giantbic;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("giantbic_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("presets") {
    const auto names = preset_names();
    CHECK(names.size() == 7);
    for (const auto& n : names) {
        const auto s = preset(n);
        REQUIRE(s.has_value());
        CHECK(s->name == n);
        CHECK(validate_config(s->run.system) == s->run.system);
        CHECK(s->run.system.g_1 == 0.1);
        CHECK(s->run.system.omega_1 == 0.0);
        CHECK(s->run.dt == 0.02);
    }
    const auto fig3 = *preset("fig3");
    CHECK(fig3.run.t_max == 700.0);
    CHECK(fig3.initial == AtomSelector::atom1);
    CHECK(fig3.run.system.size_1() == 6);
    CHECK(fig3.run.system.offset() == 3);
    const auto fig4 = *preset("fig4");
    CHECK(fig4.run.t_max == 600.0);
    CHECK(fig4.run.n_c == 1400);
    CHECK(fig4.field_peaks == std::vector<int>{2, 10});
    CHECK(preset("table1")->kind == ScenarioKind::census);
    CHECK_FALSE(preset("fig5").has_value());
    CHECK(fig3.field_window() == std::pair{-9, 20});
}

TEST_CASE("loading scenarios") {
    CHECK(load_scenario("fig2c").name == "fig2c");
    CHECK_THROWS_AS(load_scenario("no-such-preset"), ConfigError);

    const fs::path dir = fresh_dir("load");
    fs::create_directories(dir);
    write_text_file(dir / "short.cfg", "n_1 = 1\nn_2 = 7\nm_1 = 4\nm_2 = 10\nt_max = 50\n");
    const auto s = load_scenario((dir / "short.cfg").string());
    CHECK(s.name == "short");
    CHECK(s.run.t_max == 50.0);
    write_text_file(dir / "bad.cfg", "n_1 = 1\nwhat = 2\n");
    CHECK_THROWS_WITH_AS(load_scenario((dir / "bad.cfg").string()), doctest::Contains("bad.cfg:2:"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("default output directory honours the environment") {
    ::setenv("GIANTBIC_OUT", "/tmp/somewhere", 1);
    CHECK(default_output_dir() == fs::path("/tmp/somewhere"));
    ::setenv("GIANTBIC_OUT", "", 1);
    CHECK(default_output_dir() == fs::path("giantbic-out"));
    ::unsetenv("GIANTBIC_OUT");
    CHECK(default_output_dir() == fs::path("giantbic-out"));
}

TEST_CASE("oscillation period of a synthetic trajectory") {
    AtomTrajectory tr;
    const double period = 37.5;
    for (int n = 0; n <= 20000; ++n) {
        const double t = n * 0.01;
        tr.times.push_back(t);
        tr.alpha_1.push_back(std::cos(std::numbers::pi * t / period));
        tr.alpha_2.push_back(0.0);
    }
    const auto p = oscillation_period(tr);
    REQUIRE(p.has_value());
    CHECK(*p == doctest::Approx(period).epsilon(1e-4));

    AtomTrajectory flat;
    for (int n = 0; n < 100; ++n) {
        flat.times.push_back(n);
        flat.alpha_1.push_back(std::exp(-0.01 * n));
        flat.alpha_2.push_back(0.0);
    }
    CHECK_FALSE(oscillation_period(flat).has_value());
}

TEST_CASE("off-peak fraction") {
    FieldSnapshot f;
    f.first_site = 0;
    f.beta.assign(13, cplx(0.0, 0.0));
    f.beta[2] = 1.0;
    f.beta[10] = cplx(0.0, 1.0);
    f.beta[3] = 0.1;
    const std::vector<int> peaks{2, 10};
    CHECK(off_peak_fraction(f, 1, 11, peaks) == 0.0);
    f.beta[6] = 0.5;
    CHECK(off_peak_fraction(f, 1, 11, peaks) == doctest::Approx(0.25 / 2.26));
    CHECK(off_peak_fraction(f, 1, 11, std::vector<int>{}) == 1.0);
    FieldSnapshot empty;
    empty.beta.assign(3, 0.0);
    CHECK(off_peak_fraction(empty, 0, 2, peaks) == 0.0);
}

TEST_CASE("sweeps") {
    RunConfig base;
    base.system = with_geometry(SystemConfig{}, 8, 1);

    SUBCASE("offset sweep alternates at N = 8") {
        const std::vector<double> deltas{1, 2, 3, 4, 5, 6, 7};
        const auto rows = sweep(base, SweepKey::delta, deltas);
        REQUIRE(rows.size() == 7);
        for (const auto& r : rows) {
            CAPTURE(r.value);
            const int expected = static_cast<int>(r.value) % 2 == 0 ? 1 : 0;
            CHECK(r.search.total_multiplicity() == expected);
            CHECK(r.lattice_bic_count == std::optional<std::size_t>(expected));
            CHECK(r.config.offset() == static_cast<int>(r.value));
        }
        const std::string csv = sweep_csv(SweepKey::delta, rows);
        CHECK(csv.rfind("delta,N,delta,g,roots", 0) == 0);
    }

    SUBCASE("worker count does not change the result") {
        base.system = with_geometry(SystemConfig{}, 6, 3);
        const std::vector<double> gs{0.05, 0.1, 0.15, 0.2};
        SweepOptions one;
        SweepOptions three;
        three.workers = 3;
        const auto a = sweep_csv(SweepKey::g, sweep(base, SweepKey::g, gs, one));
        const auto b = sweep_csv(SweepKey::g, sweep(base, SweepKey::g, gs, three));
        CHECK(a == b);
    }

    SUBCASE("root splitting and width grow with the coupling") {
        base.system = with_geometry(SystemConfig{}, 6, 3);
        const std::vector<double> gs{0.03, 0.05, 0.1, 0.2};
        const auto rows = sweep(base, SweepKey::g, gs);
        double last_split = 0.0, last_width = 0.0;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            const auto& roots = rows[i].search.roots;
            REQUIRE(roots.size() == 2);
            const double split = roots[1].energy - roots[0].energy;
            CHECK(split > last_split);
            CHECK(roots[0].width > last_width);
            last_split = split;
            last_width = roots[0].width;
        }
        // At g = 0.2 the split roots radiate faster than the acceptance width.
        CHECK(rows.back().search.roots.empty());
        CHECK(rows.back().search.rejected.size() == 2);
    }

    SUBCASE("empty and invalid sweeps") {
        CHECK(sweep(base, SweepKey::g, std::vector<double>{}).empty());
        CHECK_THROWS_AS(sweep(base, SweepKey::delta, std::vector<double>{1.5}), ConfigError);
        CHECK_THROWS_AS(sweep(base, SweepKey::size, std::vector<double>{4, 0, 6}), ConfigError);
        CHECK(parse_sweep_key("N") == SweepKey::size);
        CHECK_FALSE(parse_sweep_key("omega").has_value());
        CHECK(to_string(SweepKey::dt) == "dt");
    }
}

TEST_CASE("scenario runs write complete and reproducible artifacts") {
    Scenario sc = *preset("fig2c");
    sc.run.t_max = 200.0;
    const fs::path a = fresh_dir("run_a");
    const fs::path b = fresh_dir("run_b");
    const auto ra = run_scenario(sc, a);
    const auto rb = run_scenario(sc, b, RunOptions{2, true});
    CHECK(ra.all_passed());
    REQUIRE(ra.find("mtrace_late_imag") != nullptr);
    CHECK(ra.find("mtrace_late_imag")->passed);
    CHECK(ra.find("no_such_check") == nullptr);
    for (const auto& f : ra.files) {
        CAPTURE(f);
        CHECK(fs::is_regular_file(a / f));
        if (f.ends_with(".csv")) CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "manifest.json").find("\"all_passed\": true") != std::string::npos);
    for (const auto& entry : fs::directory_iterator(a)) CHECK_FALSE(entry.path().extension() == ".part");
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("census scenario") {
    const fs::path dir = fresh_dir("census");
    const auto rep = run_scenario(*preset("table1"), dir);
    CHECK(rep.all_passed());
    const std::string csv = slurp(dir / "census.csv");
    CHECK(csv.rfind("N,delta,roots,E1,E2,max_width,lattice_bics,rejected\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines >= 12);
    fs::remove_all(dir);
}

TEST_CASE("unwritable output directory leaves no files") {
    const fs::path base = fresh_dir("blocked");
    fs::create_directories(base);
    write_text_file(base / "file", "x");
    const fs::path target = base / "file" / "out";
    Scenario sc = *preset("fig2a");
    sc.run.t_max = 20.0;
    CHECK_THROWS_AS(run_scenario(sc, target), ConfigError);
    CHECK_THROWS_AS(ensure_writable(target), ConfigError);
    CHECK_THROWS_AS(write_artifacts(target, {{"a.csv", "1"}}), ConfigError);
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(base)) ++entries;
    CHECK(entries == 1);
    fs::remove_all(base);
}
