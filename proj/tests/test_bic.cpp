#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "giantbic/bic.hpp"
#include "giantbic/spectrum.hpp"

using namespace giantbic;

namespace {

SystemConfig geometry(int size, int delta, double g = 0.1) {
    SystemConfig c = with_geometry(SystemConfig{}, size, delta);
    c.g_1 = g;
    c.g_2 = g;
    return c;
}

}  // namespace

TEST_CASE("chi lies on the unit circle inside the band") {
    const SystemConfig cfg;
    CHECK(std::abs(chi(0.0, cfg) - cplx(0.0, -1.0)) < 1e-15);
    const cplx c = chi(1.0, cfg);
    CHECK(c.real() == doctest::Approx(0.5));
    CHECK(c.imag() == doctest::Approx(-std::sqrt(0.75)));
    for (double e = -1.99; e < 2.0; e += 0.01) CHECK(std::abs(std::abs(chi(e, cfg)) - 1.0) < 1e-14);
    CHECK_THROWS_AS(chi(2.0, cfg), SolverError);
    CHECK_THROWS_AS(chi(-2.5, cfg), SolverError);
}

TEST_CASE("transcendental function examples") {
    SUBCASE("interference zero at the band centre") {
        const auto cfg = geometry(8, 2);
        CHECK(std::abs(bracket_term(0.0, Branch::plus, cfg)) < 1e-14);
        CHECK(std::abs(transcendental_value(0.0, Branch::plus, cfg)) < 1e-14);
    }
    SUBCASE("sign change brackets the shifted root") {
        const auto cfg = geometry(6, 3);
        bool changes = false;
        for (Branch b : {Branch::plus, Branch::minus}) {
            const double lo = transcendental_residual(0.005, b, cfg);
            const double hi = transcendental_residual(0.015, b, cfg);
            changes = changes || (lo * hi < 0.0);
        }
        CHECK(changes);
    }
    SUBCASE("decoupled atoms reduce to E - Omega") {
        auto cfg = geometry(6, 3, 0.0);
        cfg.omega_1 = cfg.omega_2 = 0.25;
        for (double e : {-1.5, 0.0, 0.7}) CHECK(transcendental_value(e, Branch::minus, cfg) == cplx(e - 0.25, 0.0));
    }
    SUBCASE("errors") {
        auto asym = geometry(6, 3);
        asym.g_2 = 0.2;
        CHECK_THROWS_AS(transcendental_value(0.0, Branch::plus, asym), ConfigError);
        auto sizes = geometry(6, 3);
        sizes.m_2 += 1;
        CHECK_THROWS_AS(find_bic_roots(sizes), ConfigError);
        CHECK_THROWS_AS(transcendental_value(2.0 - 1e-8, Branch::plus, geometry(6, 3)), SolverError);
    }
}

TEST_CASE("root search examples") {
    SUBCASE("two split roots") {
        const auto s = find_bic_roots(geometry(6, 3));
        REQUIRE(s.roots.size() == 2);
        CHECK(std::abs(s.roots[0].energy + 0.0097) <= 1e-3);
        CHECK(std::abs(s.roots[1].energy - 0.0097) <= 1e-3);
        CHECK(s.total_multiplicity() == 2);
        for (const auto& r : s.roots) CHECK(r.localized == std::optional<bool>(true));
    }
    SUBCASE("degenerate pair") {
        const auto s = find_bic_roots(geometry(6, 2));
        REQUIRE(s.roots.size() == 1);
        CHECK(std::abs(s.roots[0].energy) <= 1e-6);
        CHECK(s.roots[0].multiplicity == 2);
    }
    SUBCASE("no BIC") {
        const auto s = find_bic_roots(geometry(8, 3));
        CHECK(s.roots.empty());
        CHECK_FALSE(s.rejected.empty());
    }
    SUBCASE("single root") {
        const auto s = find_bic_roots(geometry(8, 2));
        REQUIRE(s.roots.size() == 1);
        CHECK(std::abs(s.roots[0].energy) <= 1e-6);
        CHECK(s.roots[0].multiplicity == 1);
    }
}

TEST_CASE("roots satisfy the equation and sit on the unit circle") {
    RootOptions opts;
    opts.lattice_n_c = 0;
    for (int size : {6, 8}) {
        for (int delta = 1; delta < size; ++delta) {
            const auto cfg = geometry(size, delta);
            const auto s = find_bic_roots(cfg, opts);
            for (const auto& r : s.roots) {
                CAPTURE(size);
                CAPTURE(delta);
                CHECK(std::abs(std::abs(r.chi) - 1.0) < 1e-14);
                CHECK(r.width <= opts.width_tol);
                for (Branch b : r.branches) CHECK(std::abs(transcendental_residual(r.energy, b, cfg)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("root set is invariant under translation and mirror in energy") {
    RootOptions opts;
    opts.lattice_n_c = 0;
    for (int delta = 1; delta <= 5; ++delta) {
        const auto cfg = geometry(6, delta);
        auto shifted = cfg;
        shifted.n_1 += 17;
        shifted = with_geometry(shifted, 6, delta);
        const auto a = find_bic_roots(cfg, opts);
        const auto b = find_bic_roots(shifted, opts);
        REQUIRE(a.roots.size() == b.roots.size());
        for (std::size_t i = 0; i < a.roots.size(); ++i) CHECK(a.roots[i].energy == doctest::Approx(b.roots[i].energy));
        const std::size_t n = a.roots.size();
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(a.roots[i].energy + a.roots[n - 1 - i].energy) <= 1e-9);
        }
    }
}

TEST_CASE("branch symmetry matches the lattice eigenvectors") {
    for (auto [size, delta] : std::vector<std::pair<int, int>>{{6, 1}, {6, 3}, {6, 5}, {8, 2}, {8, 4}}) {
        const auto cfg = geometry(size, delta);
        auto s = find_bic_roots(cfg);
        const auto lattice = classify_bound_states(eigendecompose(build_hamiltonian(cfg, 600)), cfg);
        for (const auto& r : s.roots) {
            for (const auto& st : lattice.of_kind(StateClass::bic)) {
                if (std::abs(st.energy - r.energy) > 5e-4) continue;
                CAPTURE(size);
                CAPTURE(delta);
                const int sign = symmetry_sign(r.branches.front(), cfg);
                CHECK(std::abs(st.a2 - sign * st.a1) <= 1e-6);
            }
        }
    }
}

TEST_CASE("momentum-sum oracle") {
    SUBCASE("vanishes without coupling") {
        CHECK(lamb_shift_sum_oracle(0.3, Branch::plus, geometry(6, 3, 0.0), 1000) == 0.0);
    }
    SUBCASE("converges with order of at least one") {
        const auto cfg = geometry(6, 3);
        const double e = 0.37;
        for (Branch b : {Branch::plus, Branch::minus}) {
            const double exact = closed_form_self_energy(e, b, cfg).real();
            const double e1 = std::abs(lamb_shift_sum_oracle(e, b, cfg, 400) - exact);
            const double e2 = std::abs(lamb_shift_sum_oracle(e, b, cfg, 4000) - exact);
            const double order = std::log10(e1 / e2);
            MESSAGE("errors " << e1 << " -> " << e2 << ", order " << order);
            CHECK(order >= 1.0);
            CHECK(e2 <= 1e-8);
        }
    }
    SUBCASE("single BIC geometry near the band centre") {
        const auto cfg = geometry(8, 2);
        const double e = 1e-3;
        const double exact = closed_form_self_energy(e, Branch::plus, cfg).real();
        CHECK(std::abs(lamb_shift_sum_oracle(e, Branch::plus, cfg, 100000) - exact) <= 1e-3);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(lamb_shift_sum_oracle(0.0, Branch::plus, geometry(6, 3), 2), ConfigError);
        CHECK_THROWS_AS(lamb_shift_sum_oracle(2.5, Branch::plus, geometry(6, 3), 100), SolverError);
    }
}

TEST_CASE("Rabi period") {
    BicRoot a;
    a.energy = 0.0097;
    BicRoot b;
    b.energy = -0.0097;
    const std::vector<BicRoot> split{b, a};
    const auto p = rabi_period(split);
    CHECK_FALSE(p.divergent);
    CHECK(p.period == doctest::Approx(2.0 * std::numbers::pi / 0.0194));
    CHECK(std::abs(p.period - 323.9) < 0.1);

    BicRoot d;
    d.multiplicity = 2;
    const std::vector<BicRoot> degenerate{d};
    CHECK(rabi_period(degenerate).divergent);

    const std::vector<BicRoot> one{a};
    CHECK_THROWS_AS(rabi_period(one), SolverError);
}

TEST_CASE("census alternates with the offset at N = 8") {
    const std::vector<int> deltas{1, 2, 3, 4, 5, 6, 7};
    const auto rows = bic_census(8, deltas, 0.1, SystemConfig{});
    REQUIRE(rows.size() == 7);
    for (const auto& r : rows) {
        CAPTURE(r.delta);
        CHECK(r.size == 8);
        CHECK(r.search.total_multiplicity() == (r.delta % 2 == 0 ? 1 : 0));
    }
    CHECK_THROWS_AS(bic_census(0, deltas, 0.1, SystemConfig{}), ConfigError);
}

TEST_CASE("census at N = 6") {
    const std::vector<int> deltas{1, 2, 3, 4, 5};
    const auto rows = bic_census(6, deltas, 0.1, SystemConfig{}, RootOptions{}, 2);
    for (const auto& r : rows) {
        CAPTURE(r.delta);
        CHECK(r.search.total_multiplicity() == 2);
        if (r.delta % 2 == 0) {
            REQUIRE(r.search.roots.size() == 1);
            CHECK(std::abs(r.search.roots[0].energy) <= 1e-6);
        } else {
            REQUIRE(r.search.roots.size() == 2);
            CHECK(std::abs(std::abs(r.search.roots[0].energy) - 0.0097) <= 1e-3);
        }
    }
}
