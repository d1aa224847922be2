#include "giantbic/bic.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include "giantbic/spectrum.hpp"

namespace giantbic {
namespace {

cplx ipow(cplx base, int exponent) {
    cplx result{1.0, 0.0};
    unsigned e = static_cast<unsigned>(std::abs(exponent));
    while (e != 0) {
        if (e & 1u) result *= base;
        base *= base;
        e >>= 1u;
    }
    return result;
}

void require_symmetric(const SystemConfig& cfg) {
    if (!cfg.is_symmetric()) {
        throw ConfigError(
            "closed-form bound-state condition needs g_1 = g_2, omega_1 = omega_2 and equal atom sizes");
    }
}

double reduced_energy(double energy, const SystemConfig& cfg) {
    return (energy - cfg.omega_c) / (2.0 * cfg.xi);
}

double golden_minimize(const auto& fn, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

struct Candidate {
    double energy;
    Branch branch;
};

std::vector<Candidate> scan_branch(const SystemConfig& cfg, Branch branch, const RootOptions& opts,
                                   std::vector<std::string>& warnings) {
    const double lo = cfg.band_bottom() + opts.edge_exclusion * cfg.xi;
    const double hi = cfg.band_top() - opts.edge_exclusion * cfg.xi;
    const int m = opts.scan_intervals;
    const double h = (hi - lo) / m;
    auto node = [&](int i) { return i == m ? hi : lo + i * h; };
    auto f = [&](double e) { return transcendental_residual(e, branch, cfg); };

    std::vector<double> r(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) r[static_cast<std::size_t>(i)] = f(node(i));

    std::vector<Candidate> found;
    for (int i = 0; i <= m; ++i) {
        const double ri = r[static_cast<std::size_t>(i)];
        if (ri == 0.0) {
            found.push_back({node(i), branch});
            continue;
        }
        if (i == m) break;
        const double rn = r[static_cast<std::size_t>(i) + 1];
        if (rn != 0.0 && std::signbit(ri) != std::signbit(rn)) {
            double a = node(i), b = node(i + 1), fa = ri;
            while (b - a > opts.energy_tol) {
                const double mid = 0.5 * (a + b);
                const double fm = f(mid);
                if (fm == 0.0) {
                    a = b = mid;
                    break;
                }
                if (std::signbit(fm) == std::signbit(fa)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            found.push_back({0.5 * (a + b), branch});
        }
    }
    // Even-order touches: |f| has an interior minimum without a sign change.
    for (int i = 1; i < m; ++i) {
        const double a = r[static_cast<std::size_t>(i) - 1];
        const double b = r[static_cast<std::size_t>(i)];
        const double c = r[static_cast<std::size_t>(i) + 1];
        if (a == 0.0 || b == 0.0 || c == 0.0) continue;
        if (std::signbit(a) != std::signbit(b) || std::signbit(b) != std::signbit(c)) continue;
        if (!(std::abs(b) < std::abs(a) && std::abs(b) <= std::abs(c))) continue;
        const double e = golden_minimize([&](double x) { return std::abs(f(x)); }, node(i - 1), node(i + 1),
                                         opts.energy_tol);
        if (std::abs(f(e)) <= opts.touch_tol) found.push_back({e, branch});
    }
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.energy < y.energy; });
    for (std::size_t i = 1; i < found.size(); ++i) {
        if (found[i].energy - found[i - 1].energy < 2.0 * h) {
            std::ostringstream os;
            os << "branch " << to_string(branch) << ": roots at " << found[i - 1].energy << " and "
               << found[i].energy << " are closer than two scan intervals; raise scan_intervals";
            warnings.push_back(os.str());
        }
    }
    return found;
}

}  // namespace

std::string to_string(Branch b) { return b == Branch::plus ? "+" : "-"; }

int symmetry_sign(Branch branch, const SystemConfig& cfg) noexcept {
    const int parity = (cfg.m_1 - cfg.n_1) % 2 == 0 ? 1 : -1;
    return sign_of(branch) * parity;
}

cplx chi(double energy, const SystemConfig& cfg) {
    const double x = reduced_energy(energy, cfg);
    if (!(std::abs(x) < 1.0)) throw SolverError("chi: energy outside the open band");
    return {x, -std::sqrt(1.0 - x * x)};
}

cplx bracket_term(double energy, Branch branch, const SystemConfig& cfg) {
    const cplx c = chi(energy, cfg);
    cplx cross{};
    for (int p : cfg.cross_exponents()) cross += ipow(c, p);
    const cplx numerator = 2.0 + 2.0 * ipow(c, cfg.size_1()) + static_cast<double>(sign_of(branch)) * cross;
    return numerator / (c - std::conj(c));
}

cplx closed_form_self_energy(double energy, Branch branch, const SystemConfig& cfg) {
    return -(cfg.g_1 * cfg.g_1 / cfg.xi) * bracket_term(energy, branch, cfg);
}

cplx transcendental_value(double energy, Branch branch, const SystemConfig& cfg) {
    require_symmetric(cfg);
    const double x = reduced_energy(energy, cfg);
    if (!(1.0 - std::abs(x) >= 0.5e-6)) {
        throw SolverError("transcendental_value: energy within 1e-6 xi of a band edge");
    }
    return energy - cfg.omega_1 - closed_form_self_energy(energy, branch, cfg);
}

double transcendental_residual(double energy, Branch branch, const SystemConfig& cfg) {
    return transcendental_value(energy, branch, cfg).real();
}

int RootSearch::total_multiplicity() const noexcept {
    int s = 0;
    for (const auto& r : roots) s += r.multiplicity;
    return s;
}

RootSearch find_bic_roots(const SystemConfig& raw, const RootOptions& opts) {
    const SystemConfig cfg = validate_config(raw);
    require_symmetric(cfg);
    if (opts.scan_intervals < 2) throw ConfigError("find_bic_roots: scan_intervals must be >= 2");

    RootSearch out;
    std::vector<Candidate> candidates;
    for (Branch b : {Branch::plus, Branch::minus}) {
        auto found = scan_branch(cfg, b, opts, out.warnings);
        candidates.insert(candidates.end(), found.begin(), found.end());
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& x, const auto& y) { return x.energy < y.energy; });

    std::vector<BicRoot> accepted;
    for (const auto& c : candidates) {
        const double width = std::abs(transcendental_value(c.energy, c.branch, cfg).imag());
        BicRoot root{c.energy, {c.branch}, chi(c.energy, cfg), 1, width, std::nullopt};
        if (width > opts.width_tol * cfg.xi) {
            out.rejected.push_back(root);
            continue;
        }
        if (!accepted.empty() && std::abs(accepted.back().energy - c.energy) <= opts.merge_tol * cfg.xi) {
            auto& prev = accepted.back();
            if (std::find(prev.branches.begin(), prev.branches.end(), c.branch) == prev.branches.end()) {
                prev.branches.push_back(c.branch);
                prev.multiplicity += 1;
                prev.width = std::max(prev.width, width);
            }
            continue;
        }
        accepted.push_back(root);
    }

    out.roots = std::move(accepted);
    if (opts.lattice_n_c > 0 && !out.roots.empty()) {
        const int n_c = std::max(opts.lattice_n_c, minimum_lattice_size(cfg));
        cross_check_with_lattice(out, classify_bound_states(eigendecompose(build_hamiltonian(cfg, n_c)), cfg), cfg);
    }
    return out;
}

void cross_check_with_lattice(RootSearch& search, const Classification& lattice, const SystemConfig& cfg) {
    // Finite-size shift of a lattice bound state relative to the infinite chain.
    const double match_tol = 5e-4 * cfg.xi;
    std::vector<BicRoot> kept;
    for (auto& root : search.roots) {
        std::size_t matches = 0;
        for (const auto& s : lattice.states) {
            if (s.kind == StateClass::bic && std::abs(s.energy - root.energy) <= match_tol) ++matches;
        }
        root.localized = matches > 0;
        if (matches > 0 && static_cast<int>(matches) != root.multiplicity) {
            std::ostringstream os;
            os << "root at E = " << root.energy << " has multiplicity " << root.multiplicity << " but "
               << matches << " localized lattice states";
            search.warnings.push_back(os.str());
        }
        (matches > 0 ? kept : search.rejected).push_back(std::move(root));
    }
    search.roots = std::move(kept);
}

double lamb_shift_sum_oracle(double energy, Branch branch, const SystemConfig& raw, int n_modes) {
    const SystemConfig cfg = validate_config(raw);
    require_symmetric(cfg);
    if (n_modes < 4) throw ConfigError("lamb_shift_sum_oracle: need at least 4 modes");
    const double x = reduced_energy(energy, cfg);
    if (!(std::abs(x) < 1.0)) throw SolverError("lamb_shift_sum_oracle: energy outside the open band");

    constexpr double pi = std::numbers::pi;
    // The summand is even in k, so only modes in (0, pi) are needed. The
    // resonance k0 sits on a cell boundary, straddled by two modes at +/- h/2.
    const double k0 = std::acos(-x);
    const double h_target = 2.0 * pi / n_modes;
    const long cells_below = std::max(1L, std::lround(k0 / h_target));
    const double h = k0 / static_cast<double>(cells_below);
    const double min_gap = 0.5 * h;
    if (min_gap < 1e-12 || pi - k0 < 1e-12) throw SolverError("lamb_shift_sum_oracle: pole collision");

    const int size = cfg.size_1();
    const auto exps = cfg.cross_exponents();
    const double s = symmetry_sign(branch, cfg);
    auto summand = [&](double k) {
        double form = 2.0 + 2.0 * std::cos(k * size);
        double cross = 0.0;
        for (int p : exps) cross += std::cos(k * p);
        form += s * cross;
        return form / (energy - cfg.omega_c + 2.0 * cfg.xi * std::cos(k));
    };

    const long full_cells = static_cast<long>(std::floor(pi / h + 1e-12));
    double sum = 0.0;
    for (long j = 0; j < full_cells; ++j) sum += h * summand((static_cast<double>(j) + 0.5) * h);
    const double rest = pi - static_cast<double>(full_cells) * h;
    if (rest > 1e-15) sum += rest * summand(pi - 0.5 * rest);
    return cfg.g_1 * cfg.g_1 * sum / pi;
}

RabiPeriod rabi_period(std::span<const BicRoot> roots) {
    int total = 0;
    for (const auto& r : roots) total += r.multiplicity;
    if (total != 2) throw SolverError("rabi_period: needs exactly two bound states in the continuum");
    if (roots.size() == 1) return {std::numeric_limits<double>::infinity(), true};
    const double split = std::abs(roots[0].energy - roots[1].energy);
    if (split <= 1e-8) return {std::numeric_limits<double>::infinity(), true};
    return {2.0 * std::numbers::pi / split, false};
}

SystemConfig with_geometry(const SystemConfig& base, int size, int delta) {
    SystemConfig cfg = base;
    cfg.n_2 = cfg.n_1 + size;
    cfg.m_1 = cfg.n_1 + delta;
    cfg.m_2 = cfg.m_1 + size;
    return validate_config(cfg);
}

std::vector<CensusRow> bic_census(int size, std::span<const int> deltas, double g, const SystemConfig& base,
                                  const RootOptions& opts, unsigned workers) {
    if (size < 1) throw ConfigError("bic_census: atom size must be >= 1");
    std::vector<CensusRow> rows(deltas.size());
    auto work = [&](std::size_t i) {
        SystemConfig cfg = with_geometry(base, size, deltas[i]);
        cfg.g_1 = g;
        cfg.g_2 = g;
        RootOptions scan_only = opts;
        scan_only.lattice_n_c = 0;
        CensusRow row{size, deltas[i], find_bic_roots(cfg, scan_only), std::nullopt};
        if (opts.lattice_n_c > 0) {
            const int n_c = std::max(opts.lattice_n_c, minimum_lattice_size(cfg));
            const auto lattice = classify_bound_states(eigendecompose(build_hamiltonian(cfg, n_c)), cfg);
            cross_check_with_lattice(row.search, lattice, cfg);
            row.lattice_bic_count = lattice.count(StateClass::bic);
        }
        rows[i] = std::move(row);
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < deltas.size(); ++i) work(i);
        return rows;
    }
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < deltas.size(); i += workers) work(i);
        }));
    }
    for (auto& j : jobs) j.get();
    return rows;
}

}  // namespace giantbic
