#include "giantbic/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "giantbic/specfun.hpp"
#include "giantbic/spectrum.hpp"

namespace giantbic {
namespace {

// Kernel values share one Bessel row per node; orders up to max_order.
template <typename Fn>
void for_each_bessel_row(const SystemConfig& cfg, const TimeGrid& grid, int max_order, Fn&& fn) {
    std::vector<double> row(static_cast<std::size_t>(max_order) + 1);
    for (std::size_t n = 0; n < grid.nodes(); ++n) {
        const double tau = grid.time(n);
        bessel_j_row_into(2.0 * cfg.xi * tau, row);
        fn(n, tau, row);
    }
}

// i^p J_p from a row of non-negative orders.
cplx ip_jp(int p, const std::vector<double>& row) {
    const int a = std::abs(p);
    double j = row[static_cast<std::size_t>(a)];
    if (p < 0 && (a & 1)) j = -j;
    return i_pow(p) * j;
}

int max_cross_order(const SystemConfig& cfg) {
    int m = 0;
    for (int p : cfg.cross_exponents()) m = std::max(m, std::abs(p));
    return m;
}

std::size_t grid_index(const AtomTrajectory& tr, double t) {
    if (tr.size() < 2) return 0;
    const double dt = tr.times[1] - tr.times[0];
    const auto n = static_cast<long long>(std::llround(t / dt));
    return static_cast<std::size_t>(std::clamp<long long>(n, 0, static_cast<long long>(tr.size()) - 1));
}

}  // namespace

cplx i_pow(int p) noexcept {
    switch (((p % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

KernelSet build_kernels(const SystemConfig& raw, const TimeGrid& grid) {
    const SystemConfig cfg = validate_config(raw);
    if (grid.dt() > 0.1 / cfg.xi) throw ConfigError("build_kernels: dt must be <= 0.1/xi");
    KernelSet k;
    k.dt = grid.dt();
    k.self_1.resize(grid.nodes());
    k.self_2.resize(grid.nodes());
    k.cross.resize(grid.nodes());
    const int n1 = cfg.size_1();
    const int n2 = cfg.size_2();
    const auto exps = cfg.cross_exponents();
    const int max_order = std::max({n1, n2, max_cross_order(cfg)});
    const cplx phase1 = i_pow(n1);
    const cplx phase2 = i_pow(n2);
    for_each_bessel_row(cfg, grid, max_order, [&](std::size_t n, double tau, const std::vector<double>& row) {
        const cplx carrier = std::polar(1.0, -cfg.omega_c * tau);
        k.self_1[n] = carrier * (row[0] + phase1 * row[static_cast<std::size_t>(n1)]);
        k.self_2[n] = carrier * (row[0] + phase2 * row[static_cast<std::size_t>(n2)]);
        cplx c{};
        for (int p : exps) c += ip_jp(p, row);
        k.cross[n] = carrier * c;
    });
    return k;
}

std::vector<cplx> cross_kernel_term(int p, const SystemConfig& cfg, const TimeGrid& grid) {
    std::vector<cplx> out(grid.nodes());
    for_each_bessel_row(cfg, grid, std::abs(p), [&](std::size_t n, double tau, const std::vector<double>& row) {
        out[n] = std::polar(1.0, -cfg.omega_c * tau) * ip_jp(p, row);
    });
    return out;
}

MemoryIntegrals memory_integrals(const SystemConfig& cfg, const KernelSet& k) {
    const std::size_t n = k.size();
    MemoryIntegrals m;
    m.a1.resize(n);
    m.a2.resize(n);
    m.b.resize(n);
    const cplx i{0.0, 1.0};
    cplx s1{}, s2{}, sc{};
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            s1 += 0.5 * k.dt * (k.self_1[t - 1] + k.self_1[t]);
            s2 += 0.5 * k.dt * (k.self_2[t - 1] + k.self_2[t]);
            sc += 0.5 * k.dt * (k.cross[t - 1] + k.cross[t]);
        }
        m.a1[t] = cfg.omega_1 - 2.0 * i * cfg.g_1 * cfg.g_1 * s1;
        m.a2[t] = cfg.omega_2 - 2.0 * i * cfg.g_2 * cfg.g_2 * s2;
        m.b[t] = -i * cfg.g_1 * cfg.g_2 * sc;
    }
    return m;
}

Eigen::Matrix2cd m_matrix(const SystemConfig& cfg, const TimeGrid& grid, double t, const KernelSet& kernels) {
    const auto node = grid.index_of(t);
    if (!node || *node >= kernels.size()) throw ConfigError("m_matrix: t is not a node of the kernel grid");
    const cplx i{0.0, 1.0};
    cplx s1{}, s2{}, sc{};
    for (std::size_t n = 1; n <= *node; ++n) {
        s1 += 0.5 * kernels.dt * (kernels.self_1[n - 1] + kernels.self_1[n]);
        s2 += 0.5 * kernels.dt * (kernels.self_2[n - 1] + kernels.self_2[n]);
        sc += 0.5 * kernels.dt * (kernels.cross[n - 1] + kernels.cross[n]);
    }
    Eigen::Matrix2cd m;
    m(0, 0) = cfg.omega_1 - 2.0 * i * cfg.g_1 * cfg.g_1 * s1;
    m(1, 1) = cfg.omega_2 - 2.0 * i * cfg.g_2 * cfg.g_2 * s2;
    m(0, 1) = -i * cfg.g_1 * cfg.g_2 * sc;
    m(1, 0) = m(0, 1);
    return m;
}

EigenTrace m_eigenvalues_trace(const SystemConfig& cfg, const TimeGrid& grid) {
    EigenTrace tr;
    tr.entries = memory_integrals(cfg, build_kernels(cfg, grid));
    const std::size_t n = grid.nodes();
    tr.times.resize(n);
    tr.lambda_1.resize(n);
    tr.lambda_2.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const cplx a1 = tr.entries.a1[t], a2 = tr.entries.a2[t], b = tr.entries.b[t];
        const cplx mean = 0.5 * (a1 + a2);
        const cplx half_gap = 0.5 * (a1 - a2);
        const cplx root = std::sqrt(half_gap * half_gap + b * b);
        cplx up = mean + root, down = mean - root;
        if (t == 0) {
            if (down.real() > up.real()) std::swap(up, down);
        } else {
            const cplx p1 = tr.lambda_1[t - 1], p2 = tr.lambda_2[t - 1];
            const double keep = std::abs(up - p1) + std::abs(down - p2);
            const double swap = std::abs(down - p1) + std::abs(up - p2);
            if (swap < keep || (swap == keep && down.real() > up.real())) std::swap(up, down);
        }
        tr.times[t] = grid.time(t);
        tr.lambda_1[t] = up;
        tr.lambda_2[t] = down;
    }
    return tr;
}

AtomTrajectory solve_volterra(const SystemConfig& raw, const WavefunctionState& psi0, const TimeGrid& grid,
                              const KernelSet& kernels, const VolterraOptions& opts) {
    const SystemConfig cfg = validate_config(raw);
    if (!psi0.photon_vacuum()) throw ConfigError("solve_volterra: initial photon field must be empty");
    if (kernels.size() < grid.nodes() || std::abs(kernels.dt - grid.dt()) > 1e-15 * grid.dt()) {
        throw ConfigError("solve_volterra: kernel table does not match the time grid");
    }
    const std::size_t nodes = grid.nodes();
    const double dt = grid.dt();

    // Coupling-weighted kernels, split into real and imaginary parts for the hot loop.
    std::vector<double> k11r(nodes), k11i(nodes), k22r(nodes), k22i(nodes), k12r(nodes), k12i(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        const cplx a = 2.0 * cfg.g_1 * cfg.g_1 * kernels.self_1[n];
        const cplx b = 2.0 * cfg.g_2 * cfg.g_2 * kernels.self_2[n];
        const cplx c = cfg.g_1 * cfg.g_2 * kernels.cross[n];
        k11r[n] = a.real(), k11i[n] = a.imag();
        k22r[n] = b.real(), k22i[n] = b.imag();
        k12r[n] = c.real(), k12i[n] = c.imag();
    }
    std::vector<double> y1r(nodes), y1i(nodes), y2r(nodes), y2i(nodes);
    y1r[0] = psi0.alpha_1.real(), y1i[0] = psi0.alpha_1.imag();
    y2r[0] = psi0.alpha_2.real(), y2i[0] = psi0.alpha_2.imag();

    const cplx i{0.0, 1.0};
    const cplx k11_0{k11r[0], k11i[0]}, k22_0{k22r[0], k22i[0]}, k12_0{k12r[0], k12i[0]};
    // (I + dt/2 (i Omega + dt/2 K_0)) y_n = rhs
    Eigen::Matrix2cd lhs;
    lhs(0, 0) = 1.0 + 0.5 * dt * (i * cfg.omega_1 + 0.5 * dt * k11_0);
    lhs(1, 1) = 1.0 + 0.5 * dt * (i * cfg.omega_2 + 0.5 * dt * k22_0);
    lhs(0, 1) = 0.25 * dt * dt * k12_0;
    lhs(1, 0) = lhs(0, 1);
    const Eigen::Matrix2cd lhs_inv = lhs.inverse();

    // F_{n-1} = dy/dt at the previous node.
    cplx f1 = -i * cfg.omega_1 * psi0.alpha_1;
    cplx f2 = -i * cfg.omega_2 * psi0.alpha_2;
    const cplx y1_0 = psi0.alpha_1, y2_0 = psi0.alpha_2;

    AtomTrajectory out;
    out.times.resize(nodes);
    out.alpha_1.resize(nodes);
    out.alpha_2.resize(nodes);
    out.times[0] = 0.0;
    out.alpha_1[0] = y1_0;
    out.alpha_2[0] = y2_0;

    for (std::size_t n = 1; n < nodes; ++n) {
        // History part of the trapezoid convolution (everything except the K_0 y_n term).
        double h1r = 0.0, h1i = 0.0, h2r = 0.0, h2i = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            const std::size_t m = n - j;
            const double ar = y1r[m], ai = y1i[m], br = y2r[m], bi = y2i[m];
            h1r += k11r[j] * ar - k11i[j] * ai + k12r[j] * br - k12i[j] * bi;
            h1i += k11r[j] * ai + k11i[j] * ar + k12r[j] * bi + k12i[j] * br;
            h2r += k12r[j] * ar - k12i[j] * ai + k22r[j] * br - k22i[j] * bi;
            h2i += k12r[j] * ai + k12i[j] * ar + k22r[j] * bi + k22i[j] * br;
        }
        const cplx kn11{k11r[n], k11i[n]}, kn22{k22r[n], k22i[n]}, kn12{k12r[n], k12i[n]};
        const cplx hist1 = dt * (cplx{h1r, h1i} + 0.5 * (kn11 * y1_0 + kn12 * y2_0));
        const cplx hist2 = dt * (cplx{h2r, h2i} + 0.5 * (kn12 * y1_0 + kn22 * y2_0));

        const cplx prev1{y1r[n - 1], y1i[n - 1]}, prev2{y2r[n - 1], y2i[n - 1]};
        const Eigen::Vector2cd rhs(prev1 + 0.5 * dt * (f1 - hist1), prev2 + 0.5 * dt * (f2 - hist2));
        const Eigen::Vector2cd y = lhs_inv * rhs;

        y1r[n] = y(0).real(), y1i[n] = y(0).imag();
        y2r[n] = y(1).real(), y2i[n] = y(1).imag();
        const cplx conv1 = hist1 + 0.5 * dt * (k11_0 * y(0) + k12_0 * y(1));
        const cplx conv2 = hist2 + 0.5 * dt * (k12_0 * y(0) + k22_0 * y(1));
        f1 = -i * cfg.omega_1 * y(0) - conv1;
        f2 = -i * cfg.omega_2 * y(1) - conv2;

        out.times[n] = grid.time(n);
        out.alpha_1[n] = y(0);
        out.alpha_2[n] = y(1);
        const double p1 = std::norm(y(0)), p2 = std::norm(y(1));
        if (p1 > 1.0 + opts.blowup_tolerance || p2 > 1.0 + opts.blowup_tolerance || !std::isfinite(p1 + p2)) {
            std::ostringstream os;
            os << "solve_volterra: population exceeded 1 + " << opts.blowup_tolerance << " at t = " << grid.time(n)
               << " (|alpha_1|^2 = " << p1 << ", |alpha_2|^2 = " << p2 << "); reduce dt (currently " << dt << ")";
            throw SolverError(os.str());
        }
    }
    return out;
}

AtomTrajectory solve_volterra(const SystemConfig& cfg, const WavefunctionState& psi0, const TimeGrid& grid,
                              const VolterraOptions& opts) {
    return solve_volterra(cfg, psi0, grid, build_kernels(cfg, grid), opts);
}

std::vector<FieldSnapshot> photon_field(const SystemConfig& raw, const AtomTrajectory& tr, int site_lo,
                                        int site_hi, const std::vector<double>& times) {
    const SystemConfig cfg = validate_config(raw);
    if (site_hi < site_lo) throw ConfigError("photon_field: empty site range");
    if (tr.size() == 0) throw ConfigError("photon_field: empty trajectory");
    const double dt = tr.size() > 1 ? tr.times[1] - tr.times[0] : 1.0;
    const std::size_t n_sites = static_cast<std::size_t>(site_hi - site_lo + 1);

    std::vector<std::size_t> nodes;
    for (double t : times) {
        if (t > tr.times.back() + 0.5 * dt) throw ConfigError("photon_field: time beyond the trajectory");
        nodes.push_back(grid_index(tr, t));
    }
    std::vector<FieldSnapshot> snaps(nodes.size());
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        snaps[s].time = tr.times[nodes[s]];
        snaps[s].first_site = site_lo;
        snaps[s].beta.assign(n_sites, cplx{});
    }
    if (nodes.empty()) return snaps;
    const std::size_t last = *std::max_element(nodes.begin(), nodes.end());

    int max_order = 0;
    for (int leg : {cfg.n_1, cfg.n_2, cfg.m_1, cfg.m_2}) {
        max_order = std::max({max_order, std::abs(site_lo - leg), std::abs(site_hi - leg)});
    }
    std::vector<double> row(static_cast<std::size_t>(max_order) + 1);
    // Split real/imaginary storage keeps the inner accumulation free of complex
    // multiplication calls.
    std::vector<double> fr(n_sites), fi(n_sites), gr(n_sites), gi(n_sites);
    std::vector<std::vector<double>> acc_r(nodes.size(), std::vector<double>(n_sites, 0.0));
    std::vector<std::vector<double>> acc_i(nodes.size(), std::vector<double>(n_sites, 0.0));
    const cplx minus_i{0.0, -1.0};
    for (std::size_t l = 0; l <= last; ++l) {
        const double tau = tr.times[l];
        bessel_j_row_into(2.0 * cfg.xi * tau, row);
        const cplx carrier = std::polar(1.0, -cfg.omega_c * tau);
        for (std::size_t s = 0; s < n_sites; ++s) {
            const int j = site_lo + static_cast<int>(s);
            const cplx f = carrier * (ip_jp(j - cfg.n_1, row) + ip_jp(j - cfg.n_2, row));
            const cplx g = carrier * (ip_jp(j - cfg.m_1, row) + ip_jp(j - cfg.m_2, row));
            fr[s] = f.real();
            fi[s] = f.imag();
            gr[s] = g.real();
            gi[s] = g.imag();
        }
        for (std::size_t s = 0; s < nodes.size(); ++s) {
            const std::size_t n = nodes[s];
            if (l > n || n == 0) continue;
            const double w = (l == 0 || l == n) ? 0.5 * dt : dt;
            const cplx c1 = minus_i * w * cfg.g_1 * tr.alpha_1[n - l];
            const cplx c2 = minus_i * w * cfg.g_2 * tr.alpha_2[n - l];
            const double c1r = c1.real(), c1i = c1.imag(), c2r = c2.real(), c2i = c2.imag();
            double* br = acc_r[s].data();
            double* bi = acc_i[s].data();
            for (std::size_t q = 0; q < n_sites; ++q) {
                br[q] += c1r * fr[q] - c1i * fi[q] + c2r * gr[q] - c2i * gi[q];
                bi[q] += c1r * fi[q] + c1i * fr[q] + c2r * gi[q] + c2i * gr[q];
            }
        }
    }
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        for (std::size_t q = 0; q < n_sites; ++q) snaps[s].beta[q] = {acc_r[s][q], acc_i[s][q]};
    }
    return snaps;
}

std::pair<int, int> radiation_window(const SystemConfig& cfg, double t) noexcept {
    const int reach = static_cast<int>(std::ceil(2.0 * cfg.xi * t)) + 20;
    return {cfg.leftmost_leg() - reach, cfg.rightmost_leg() + reach};
}

NormCheck norm_check(const SystemConfig& cfg, const AtomTrajectory& tr, const FieldSnapshot& field) {
    const std::size_t n = grid_index(tr, field.time);
    NormCheck out;
    out.deficit = std::abs(1.0 - tr.population_1(n) - tr.population_2(n) - field.total_weight());
    const auto [lo, hi] = radiation_window(cfg, field.time);
    out.window_ok = field.first_site <= lo && field.last_site() >= hi;
    return out;
}

SteadyState steady_state_prediction(const Classification& lattice, const WavefunctionState& psi0) {
    const auto bics = lattice.of_kind(StateClass::bic);
    if (bics.size() != 1) {
        std::ostringstream os;
        os << "steady_state_prediction: needs exactly one bound state in the continuum, found " << bics.size();
        throw SolverError(os.str());
    }
    const auto& bic = bics.front();
    const auto v = lattice.basis.vectors.col(static_cast<Eigen::Index>(bic.index));
    cplx overlap = bic.a1 * psi0.alpha_1 + bic.a2 * psi0.alpha_2;
    for (const auto& [site, amp] : psi0.beta) {
        const Eigen::Index r = 2 + site + lattice.basis.site_offset;
        if (r >= 2 && r < v.size()) overlap += v(r) * amp;
    }
    const double w = std::norm(overlap);
    return {bic.a1 * bic.a1 * w, bic.a2 * bic.a2 * w, bic.energy};
}

Plateau detect_plateau(const AtomTrajectory& tr, double window, double rel_tol) {
    Plateau out;
    if (tr.size() < 2) return out;
    const double dt = tr.times[1] - tr.times[0];
    const std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window / dt)));
    if (tr.size() < 2 * w) return out;

    // Prefix sums give every window mean in O(1).
    std::vector<double> c1(tr.size() + 1, 0.0), c2(tr.size() + 1, 0.0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        c1[k + 1] = c1[k] + tr.population_1(k);
        c2[k + 1] = c2[k] + tr.population_2(k);
    }
    const double inv_w = 1.0 / static_cast<double>(w);
    auto mean = [&](const std::vector<double>& c, std::size_t end) { return (c[end + 1] - c[end + 1 - w]) * inv_w; };

    const std::size_t end = tr.size() - 1;
    out.population_1 = mean(c1, end);
    out.population_2 = mean(c2, end);

    // Bound states outside the band keep beating against the in-band state, so
    // the populations never freeze; the trailing-window mean does.
    auto settled = [&](const std::vector<double>& c, std::size_t e) {
        const double now = mean(c, e);
        const double before = mean(c, e - w);
        return std::abs(now - before) <= rel_tol * std::max(std::abs(now), 1e-300);
    };
    const std::size_t stride = std::max<std::size_t>(1, w / 10);
    for (std::size_t e = 2 * w - 1; e <= end; e += stride) {
        if (settled(c1, e) && settled(c2, e)) {
            out.reached = true;
            out.time = tr.times[e];
            break;
        }
    }
    return out;
}

}  // namespace giantbic
