#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "giantbic/bic.hpp"
#include "giantbic/spectrum.hpp"
#include "oracles.hpp"

using namespace giantbic;

namespace {

SystemConfig geometry(int size, int delta, double g = 0.1) {
    SystemConfig c = with_geometry(SystemConfig{}, size, delta);
    c.g_1 = g;
    c.g_2 = g;
    return c;
}

Classification classify(const SystemConfig& cfg, int n_c) {
    return classify_bound_states(eigendecompose(build_hamiltonian(cfg, n_c)), cfg);
}

double photon_weight(const std::vector<SiteProbability>& profile, int lo, int hi) {
    double w = 0.0;
    for (const auto& p : profile) {
        if (p.site >= lo && p.site <= hi) w += p.prob;
    }
    return w;
}

}  // namespace

TEST_CASE("hamiltonian structure") {
    const SystemConfig cfg = geometry(6, 3);
    const auto h = build_hamiltonian(cfg, 400);
    CHECK(h.dim() == 402);
    CHECK((h.matrix - h.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);

    int couplings = 0;
    for (Eigen::Index r = 2; r < h.dim(); ++r) {
        if (h.matrix(0, r) != 0.0) ++couplings;
        if (h.matrix(1, r) != 0.0) ++couplings;
    }
    CHECK(couplings == 4);
    for (int leg : {cfg.n_1, cfg.n_2}) CHECK(h.matrix(0, h.row_of_site(leg)) == cfg.g_1);
    for (int leg : {cfg.m_1, cfg.m_2}) CHECK(h.matrix(1, h.row_of_site(leg)) == cfg.g_2);
    CHECK(h.matrix(0, 1) == 0.0);
    CHECK(h.site_of_row(h.row_of_site(7)) == 7);

    // The coupling region sits in the middle of the chain.
    const int left_room = cfg.leftmost_leg() - h.first_site();
    const int right_room = h.last_site() - cfg.rightmost_leg();
    CHECK(std::abs(left_room - right_room) <= 1);

    CHECK_THROWS_AS(build_hamiltonian(cfg, minimum_lattice_size(cfg) - 1), ConfigError);
    CHECK_NOTHROW(build_hamiltonian(cfg, minimum_lattice_size(cfg)));
}

TEST_CASE("decoupled lattice reproduces the open chain") {
    SystemConfig cfg = geometry(6, 3, 0.0);
    cfg.omega_1 = 0.37;
    cfg.omega_2 = -1.1;
    const int n_c = 401;
    const auto sp = eigendecompose(build_hamiltonian(cfg, n_c));

    std::vector<double> expected;
    for (int q = 1; q <= n_c; ++q) expected.push_back(oracle::open_chain_energy(q, n_c, cfg.omega_c, cfg.xi));
    expected.push_back(cfg.omega_1);
    expected.push_back(cfg.omega_2);
    std::sort(expected.begin(), expected.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        worst = std::max(worst, std::abs(sp.energies(static_cast<Eigen::Index>(i)) - expected[i]));
    }
    CHECK(worst <= 1e-10);

    const auto lattice = classify_bound_states(sp, cfg);
    CHECK(lattice.count(StateClass::bic) == 0);
    CHECK(lattice.count(StateClass::boc) == 0);
}

TEST_CASE("eigenbasis is orthonormal, complete and bounded") {
    const SystemConfig cfg = geometry(8, 2);
    const auto h = build_hamiltonian(cfg, 600);
    const auto sp = eigendecompose(h);
    CHECK(sp.size() == 602);
    CHECK(sp.orthonormality_error() <= 1e-8);
    CHECK(sp.max_residual(h) <= 1e-8);
    for (Eigen::Index i = 1; i < sp.energies.size(); ++i) CHECK(sp.energies(i) >= sp.energies(i - 1));

    // Gershgorin: every eigenvalue lies within 2g of the uncoupled spectrum.
    const double lo = std::min(cfg.omega_1, cfg.band_bottom()) - 2.0 * cfg.g_1;
    const double hi = std::max(cfg.omega_1, cfg.band_top()) + 2.0 * cfg.g_1;
    CHECK(sp.energies.minCoeff() >= lo);
    CHECK(sp.energies.maxCoeff() <= hi);

    const Eigen::VectorXd row_norms = sp.vectors.rowwise().squaredNorm();
    CHECK((row_norms.array() - 1.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("classification of the two-BIC geometry") {
    const auto lattice = classify(geometry(6, 3), 600);
    const auto bics = lattice.of_kind(StateClass::bic);
    REQUIRE(bics.size() == 2);
    CHECK(std::abs(bics[0].energy + 0.0097) <= 1e-3);
    CHECK(std::abs(bics[1].energy - 0.0097) <= 1e-3);
    for (const auto& b : bics) {
        CHECK(b.ipr >= lattice.options.ipr_threshold);
        CHECK(b.window_weight >= 0.9);
        CHECK(b.a1 >= 0.0);
        CHECK_FALSE(b.ambiguous);
    }
}

TEST_CASE("classification without BICs") {
    const auto lattice = classify(geometry(8, 3), 600);
    CHECK(lattice.count(StateClass::bic) == 0);
    CHECK(lattice.count(StateClass::boc) + lattice.count(StateClass::bic) + lattice.count(StateClass::extended) ==
          lattice.states.size());
}

TEST_CASE("single BIC geometry and its bound states outside the band") {
    const SystemConfig cfg = geometry(8, 2);
    const auto lattice = classify(cfg, 600);
    CHECK(lattice.count(StateClass::bic) == 1);
    const auto bocs = lattice.of_kind(StateClass::boc);
    MESSAGE("bound states outside the band for N = 8, delta = 2: " << bocs.size());
    for (const auto& b : bocs) {
        CHECK((b.energy < cfg.band_bottom() || b.energy > cfg.band_top()));
    }
}

TEST_CASE("photon profiles") {
    SUBCASE("profile weight complements the atomic weight") {
        const auto lattice = classify(geometry(6, 3), 600);
        for (std::size_t i : {std::size_t{0}, std::size_t{150}, std::size_t{301}}) {
            const auto pair = lattice.basis.pair(i);
            const auto prof = photon_profile(pair, lattice.basis.site_offset);
            double total = 0.0;
            for (const auto& p : prof) total += p.prob;
            const double atoms = pair.vector(0) * pair.vector(0) + pair.vector(1) * pair.vector(1);
            CHECK(total == doctest::Approx(1.0 - atoms).epsilon(1e-12));
        }
    }

    SUBCASE("two-BIC states stay inside the coupling region") {
        // The split roots carry a tiny radiative width, so on a finite chain a
        // few percent of their photon weight hybridizes with extended modes.
        const SystemConfig cfg = geometry(6, 3);
        const auto lattice = classify(cfg, 600);
        for (const auto& b : lattice.of_kind(StateClass::bic)) {
            const auto prof = photon_profile(lattice.basis.pair(b.index), lattice.basis.site_offset);
            const double photons = 1.0 - b.a1 * b.a1 - b.a2 * b.a2;
            const double inside = photon_weight(prof, cfg.n_1, cfg.m_2);
            MESSAGE("photon share on sites n_1..m_2: " << inside / photons);
            CHECK(b.a1 * b.a1 + b.a2 * b.a2 + inside >= 0.99);
            CHECK(inside >= 0.9 * photons);
        }
    }

    SUBCASE("single BIC occupies sites 2 and 10") {
        SystemConfig cfg;
        cfg.n_1 = 1;
        cfg.n_2 = 9;
        cfg.m_1 = 3;
        cfg.m_2 = 11;
        const auto lattice = classify(cfg, 600);
        const auto bics = lattice.of_kind(StateClass::bic);
        REQUIRE(bics.size() == 1);
        CHECK(std::abs(bics[0].a1 * bics[0].a1 - bics[0].a2 * bics[0].a2) <= 1e-8);
        auto prof = photon_profile(lattice.basis.pair(bics[0].index), lattice.basis.site_offset);
        std::sort(prof.begin(), prof.end(), [](const auto& a, const auto& b) { return a.prob > b.prob; });
        std::vector<int> top{prof[0].site, prof[1].site};
        std::sort(top.begin(), top.end());
        CHECK(top == std::vector<int>{2, 10});
        CHECK(prof[0].prob == doctest::Approx(prof[1].prob).epsilon(1e-8));
    }
}

TEST_CASE("extended states match the plane-wave oracle") {
    const SystemConfig cfg = geometry(6, 3, 0.0);
    const int n_c = 400;
    const auto lattice = classify(cfg, n_c);
    for (int q : {1, 57, 100, 333}) {
        const double e = oracle::open_chain_energy(q, n_c, cfg.omega_c, cfg.xi);
        const auto mode = oracle::open_chain_mode(q, n_c);
        double ipr = 0.0;
        for (double v : mode) ipr += v * v * v * v;
        const auto it = std::min_element(lattice.states.begin(), lattice.states.end(), [&](const auto& a, const auto& b) {
            return std::abs(a.energy - e) < std::abs(b.energy - e);
        });
        CAPTURE(q);
        CHECK(it->kind == StateClass::extended);
        CHECK(it->ipr == doctest::Approx(ipr).epsilon(1e-8));
        CHECK(it->ipr < 5.0 / n_c);
    }
}

TEST_CASE("a single giant atom hosts a BIC only when its size is 2 mod 4") {
    for (int size : {4, 5, 6, 7, 8, 10, 12, 14}) {
        SystemConfig cfg = geometry(size, 1);
        cfg.g_2 = 0.0;
        cfg.omega_2 = 5.0;
        const auto lattice = classify(cfg, 400);
        const bool expect = size % 4 == 2;
        CAPTURE(size);
        CHECK((lattice.count(StateClass::bic) > 0) == expect);
    }
}

TEST_CASE("exact propagation") {
    SUBCASE("decoupled atom keeps its phase") {
        SystemConfig cfg = geometry(6, 3, 0.0);
        cfg.omega_1 = 0.3;
        const TimeGrid grid(50.0, 0.05);
        const auto res = exact_propagate(cfg, initial_state(AtomSelector::atom1, cfg), grid, 200);
        double worst = 0.0;
        for (std::size_t n = 0; n < res.trajectory.size(); ++n) {
            const double t = res.trajectory.times[n];
            worst = std::max(worst, std::abs(res.trajectory.alpha_1[n] - std::polar(1.0, -0.3 * t)));
            CHECK(res.trajectory.population_2(n) <= 1e-28);
        }
        CHECK(worst <= 1e-10);
    }

    SUBCASE("Rabi exchange peaks at half the period") {
        const SystemConfig cfg = geometry(6, 3);
        const auto roots = find_bic_roots(cfg);
        const double period = rabi_period(roots.roots).period;
        const TimeGrid grid(250.0, 0.05);
        const auto res = exact_propagate(cfg, initial_state(AtomSelector::atom1, cfg), grid, 1200);
        CHECK(res.wavefront_ok);
        CHECK(res.max_norm_deficit <= 1e-10);
        std::size_t best = 0;
        for (std::size_t n = 0; n < res.trajectory.size(); ++n) {
            if (res.trajectory.population_2(n) > res.trajectory.population_2(best)) best = n;
        }
        const double t_peak = res.trajectory.times[best];
        MESSAGE("pop2 maximum at t = " << t_peak << ", half period " << period / 2);
        CHECK(std::abs(t_peak - period / 2) <= 0.05 * period / 2);
    }

    SUBCASE("short lattices are flagged") {
        const SystemConfig cfg = geometry(6, 3);
        const TimeGrid grid(400.0, 0.5);
        const auto res = exact_propagate(cfg, initial_state(AtomSelector::atom1, cfg), grid, 400);
        CHECK_FALSE(res.wavefront_ok);
        CHECK_FALSE(res.warnings.empty());
        CHECK(wavefront_lattice_size(cfg, 400.0) > 400);
    }

    SUBCASE("snapshots carry the requested window") {
        const SystemConfig cfg = geometry(6, 3);
        ExactOptions opts;
        opts.snapshot_times = {0.0, 10.0};
        opts.window_lo = -5;
        opts.window_hi = 20;
        const auto res = exact_propagate(cfg, initial_state(AtomSelector::atom1, cfg), TimeGrid(10.0, 0.1), 200, opts);
        REQUIRE(res.snapshots.size() == 2);
        CHECK(res.snapshots[0].first_site == -5);
        CHECK(res.snapshots[0].last_site() == 20);
        CHECK(res.snapshots[0].total_weight() <= 1e-20);
        CHECK(res.snapshots[1].total_weight() > 0.0);
    }
}
