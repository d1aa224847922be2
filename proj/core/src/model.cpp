#include "giantbic/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace giantbic {

bool SystemConfig::is_symmetric(double tol) const noexcept {
    return std::abs(g_1 - g_2) <= tol && std::abs(omega_1 - omega_2) <= tol &&
           size_1() == size_2();
}

SystemConfig validate_config(SystemConfig cfg) {
    for (double v : {cfg.omega_c, cfg.xi, cfg.omega_1, cfg.omega_2, cfg.g_1, cfg.g_2}) {
        if (!std::isfinite(v)) throw ConfigError("config: non-finite parameter");
    }
    if (cfg.xi <= 0.0) throw ConfigError("config: hopping strength xi must be positive");
    if (cfg.g_1 < 0.0 || cfg.g_2 < 0.0) throw ConfigError("config: coupling strengths must be non-negative");
    if (cfg.n_1 == cfg.n_2) throw ConfigError("config: coincident legs of the first atom (n_1 == n_2)");
    if (cfg.m_1 == cfg.m_2) throw ConfigError("config: coincident legs of the second atom (m_1 == m_2)");
    if (cfg.n_1 > cfg.n_2) std::swap(cfg.n_1, cfg.n_2);
    if (cfg.m_1 > cfg.m_2) std::swap(cfg.m_1, cfg.m_2);
    return cfg;
}

double dispersion(double k, const SystemConfig& cfg) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::fmod(k + std::numbers::pi, two_pi);
    if (wrapped < 0.0) wrapped += two_pi;
    wrapped -= std::numbers::pi;
    return cfg.omega_c - 2.0 * cfg.xi * std::cos(wrapped);
}

std::optional<AtomSelector> parse_atom_selector(std::string_view name) {
    if (name == "atom1") return AtomSelector::atom1;
    if (name == "atom2") return AtomSelector::atom2;
    if (name == "symmetric") return AtomSelector::symmetric;
    if (name == "antisymmetric") return AtomSelector::antisymmetric;
    return std::nullopt;
}

std::string to_string(AtomSelector which) {
    switch (which) {
        case AtomSelector::atom1: return "atom1";
        case AtomSelector::atom2: return "atom2";
        case AtomSelector::symmetric: return "symmetric";
        case AtomSelector::antisymmetric: return "antisymmetric";
    }
    return "unknown";
}

double WavefunctionState::norm_squared() const noexcept {
    double s = std::norm(alpha_1) + std::norm(alpha_2);
    for (const auto& [site, amp] : beta) s += std::norm(amp);
    return s;
}

bool WavefunctionState::photon_vacuum() const noexcept {
    return std::all_of(beta.begin(), beta.end(), [](const auto& kv) { return kv.second == cplx{}; });
}

WavefunctionState initial_state(AtomSelector which, const SystemConfig&) {
    const double r = 1.0 / std::numbers::sqrt2;
    WavefunctionState s;
    switch (which) {
        case AtomSelector::atom1: s.alpha_1 = 1.0; break;
        case AtomSelector::atom2: s.alpha_2 = 1.0; break;
        case AtomSelector::symmetric:
            s.alpha_1 = r;
            s.alpha_2 = r;
            break;
        case AtomSelector::antisymmetric:
            s.alpha_1 = r;
            s.alpha_2 = -r;
            break;
    }
    return s;
}

TimeGrid::TimeGrid(double t_max, double dt) : t_max_(t_max), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time grid: dt must be positive");
    if (!(t_max >= dt) || !std::isfinite(t_max)) throw ConfigError("time grid: dt must not exceed t_max");
    nodes_ = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

std::optional<std::size_t> TimeGrid::index_of(double t, double rel_tol) const noexcept {
    if (t < 0.0) return std::nullopt;
    const double q = t / dt_;
    const double r = std::round(q);
    if (std::abs(q - r) > rel_tol * std::max(1.0, q)) return std::nullopt;
    const auto n = static_cast<std::size_t>(r);
    if (n >= nodes_) return std::nullopt;
    return n;
}

std::size_t TimeGrid::nearest_index(double t) const noexcept {
    if (t <= 0.0) return 0;
    const auto n = static_cast<std::size_t>(std::llround(t / dt_));
    return std::min(n, nodes_ - 1);
}

std::vector<double> FieldSnapshot::probabilities() const {
    std::vector<double> p(beta.size());
    std::transform(beta.begin(), beta.end(), p.begin(), [](cplx b) { return std::norm(b); });
    return p;
}

double FieldSnapshot::total_weight() const noexcept {
    double s = 0.0;
    for (cplx b : beta) s += std::norm(b);
    return s;
}

double FieldSnapshot::weight_between(int lo, int hi) const noexcept {
    double s = 0.0;
    for (int j = std::max(lo, first_site); j <= std::min(hi, last_site()); ++j) {
        s += std::norm(beta[static_cast<std::size_t>(j - first_site)]);
    }
    return s;
}

}  // namespace giantbic
