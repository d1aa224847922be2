// model.hpp - Domain types shared by every giantbic module: system parameters,
// single-excitation states, time grids and trajectories.
//
// Units: every energy is expressed in units of the hopping strength xi and
// every time in units of 1/xi (hbar = 1). Site indices follow the coupling-leg
// convention of the physical setup: the first atom touches the waveguide at
// sites n_1 < n_2, the second at m_1 < m_2.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace giantbic {

using cplx = std::complex<double>;

// Invalid user input (parameters, config files, CLI flags).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure or violated solver precondition.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    double omega_c{0.0};   // bare resonator frequency
    double xi{1.0};        // photon hopping strength
    double omega_1{0.0};   // transition frequency, first atom
    double omega_2{0.0};   // transition frequency, second atom
    double g_1{0.1};       // coupling strength, first atom
    double g_2{0.1};       // coupling strength, second atom
    int n_1{1};
    int n_2{7};
    int m_1{4};
    int m_2{10};

    int size_1() const noexcept { return n_2 - n_1; }
    int size_2() const noexcept { return m_2 - m_1; }
    int offset() const noexcept { return m_1 - n_1; }
    bool braided() const noexcept { return n_1 < m_1 && m_1 < n_2 && n_2 < m_2; }

    std::array<int, 2> legs_1() const noexcept { return {n_1, n_2}; }
    std::array<int, 2> legs_2() const noexcept { return {m_1, m_2}; }
    int leftmost_leg() const noexcept { return n_1 < m_1 ? n_1 : m_1; }
    int rightmost_leg() const noexcept { return n_2 > m_2 ? n_2 : m_2; }

    double band_bottom() const noexcept { return omega_c - 2.0 * xi; }
    double band_top() const noexcept { return omega_c + 2.0 * xi; }

    // Leg separations n_j - m_j' over all four leg pairs.
    std::array<int, 4> cross_exponents() const noexcept {
        return {n_1 - m_1, n_1 - m_2, n_2 - m_1, n_2 - m_2};
    }

    // Equal couplings, equal transition frequencies, equal sizes.
    bool is_symmetric(double tol = 1e-12) const noexcept;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// Sorts each atom's legs and checks the physical constraints. Throws ConfigError.
SystemConfig validate_config(SystemConfig cfg);

// Cosine band of the coupled-resonator waveguide; k is wrapped into [-pi, pi).
double dispersion(double k, const SystemConfig& cfg) noexcept;

enum class AtomSelector { atom1, atom2, symmetric, antisymmetric };

std::optional<AtomSelector> parse_atom_selector(std::string_view name);
std::string to_string(AtomSelector which);

struct WavefunctionState {
    cplx alpha_1{};
    cplx alpha_2{};
    std::map<int, cplx> beta;  // waveguide site -> photon amplitude

    double norm_squared() const noexcept;
    bool photon_vacuum() const noexcept;
};

WavefunctionState initial_state(AtomSelector which, const SystemConfig& cfg);

// Uniform grid t_n = n * dt, n = 0 .. nodes()-1, spanning [0, t_max].
class TimeGrid {
public:
    TimeGrid(double t_max, double dt);

    double t_max() const noexcept { return t_max_; }
    double dt() const noexcept { return dt_; }
    std::size_t nodes() const noexcept { return nodes_; }
    double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt_; }
    double last_time() const noexcept { return time(nodes_ - 1); }

    // Index of the node at time t; nullopt when t is not a node.
    std::optional<std::size_t> index_of(double t, double rel_tol = 1e-9) const noexcept;
    // Nearest node index (clamped to the grid).
    std::size_t nearest_index(double t) const noexcept;

private:
    double t_max_;
    double dt_;
    std::size_t nodes_;
};

struct AtomTrajectory {
    std::vector<double> times;
    std::vector<cplx> alpha_1;
    std::vector<cplx> alpha_2;

    std::size_t size() const noexcept { return times.size(); }
    double population_1(std::size_t n) const { return std::norm(alpha_1[n]); }
    double population_2(std::size_t n) const { return std::norm(alpha_2[n]); }
};

struct FieldSnapshot {
    double time{0.0};
    int first_site{0};          // waveguide index of beta.front()
    std::vector<cplx> beta;

    int last_site() const noexcept { return first_site + static_cast<int>(beta.size()) - 1; }
    std::vector<double> probabilities() const;
    double total_weight() const noexcept;
    // Summed |beta_j|^2 over sites lo..hi (clipped to the snapshot range).
    double weight_between(int lo, int hi) const noexcept;
};

}  // namespace giantbic
