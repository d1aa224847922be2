// bic.hpp - In-band bound states from the closed-form eigenvalue condition.
//
// For the symmetric configuration (g_1 = g_2 = g, Omega_1 = Omega_2 = Omega,
// N_1 = N_2 = N) the atomic amplitudes satisfy A_1 = +/-A_2 and an eigenenergy
// E inside the band obeys f(E) = 0 with
//
//   f(E) = E - Omega + (g^2/xi) [2 + 2 chi^N +/- sum_{j,j'} chi^|n_j - m_j'|] / (chi - chi*)
//   chi  = (E - omega_c)/(2 xi) - i sqrt(1 - ((E - omega_c)/(2 xi))^2).
//
// The term (g^2/xi)[...]/(chi - chi*) is minus the retarded self-energy of the
// symmetric (+) or antisymmetric (-) atomic combination. Its imaginary part is
// the decay rate of that combination at E; a bound state in the continuum needs
// Re f(E) = 0 together with a vanishing imaginary part.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "giantbic/model.hpp"

namespace giantbic {

enum class Branch { plus, minus };

constexpr int sign_of(Branch b) noexcept { return b == Branch::plus ? 1 : -1; }
std::string to_string(Branch b);

// Sign s with A_2 = s A_1 for the bound state of a branch. With even N all
// leg separations share the parity of delta and s = (+/-1) (-1)^delta.
int symmetry_sign(Branch branch, const SystemConfig& cfg) noexcept;

// Requires |E - omega_c| < 2 xi.
cplx chi(double energy, const SystemConfig& cfg);

// [2 + 2 chi^N +/- sum chi^|p|] / (chi - chi*).
cplx bracket_term(double energy, Branch branch, const SystemConfig& cfg);

// -(g^2/xi) * bracket_term: the retarded self-energy of the A_1 = +/-A_2 combination.
cplx closed_form_self_energy(double energy, Branch branch, const SystemConfig& cfg);

// Complex f(E); requires a symmetric config and E at least 1e-6 xi from the band edges.
cplx transcendental_value(double energy, Branch branch, const SystemConfig& cfg);

// Re f(E), the quantity that is bracketed and bisected.
double transcendental_residual(double energy, Branch branch, const SystemConfig& cfg);

struct BicRoot {
    double energy{0.0};
    std::vector<Branch> branches;  // one entry per merged branch
    cplx chi{};
    int multiplicity{1};
    double width{0.0};             // max |Im f| over the merged branches
    std::optional<bool> localized; // lattice cross-check, when performed
};

struct RootOptions {
    int scan_intervals{4000};
    double edge_exclusion{1e-4};   // xi units
    double energy_tol{1e-10};      // bisection stopping width
    double touch_tol{1e-8};        // |f| accepted at an even-order touch
    double merge_tol{1e-8};        // roots closer than this are one root
    double width_tol{1e-4};        // max |Im f| of an accepted root, xi units
    int lattice_n_c{600};          // 0 disables the finite-lattice cross-check
};

struct RootSearch {
    std::vector<BicRoot> roots;     // accepted bound states in the continuum
    std::vector<BicRoot> rejected;  // Re f = 0 but radiating, or not localized
    std::vector<std::string> warnings;

    int total_multiplicity() const noexcept;
};

RootSearch find_bic_roots(const SystemConfig& cfg, const RootOptions& opts = {});

struct Classification;

// Keeps a root only if the finite lattice has a localized in-band state at
// that energy; the others move to search.rejected.
void cross_check_with_lattice(RootSearch& search, const Classification& lattice, const SystemConfig& cfg);

// Principal-value k-sum (g^2/N_c) sum_k [2 + 2cos(kN) + s sum cos(k p)] / (E - omega_k)
// for the atomic combination A_2 = s A_1, s = symmetry_sign(branch). Mode
// placement puts the resonance k_0 midway between two modes, so the simple
// poles cancel pairwise. Converges to Re closed_form_self_energy for even N.
double lamb_shift_sum_oracle(double energy, Branch branch, const SystemConfig& cfg, int n_modes);

struct RabiPeriod {
    double period{0.0};
    bool divergent{false};  // degenerate pair: no oscillation
};

// Requires exactly two roots counted with multiplicity.
RabiPeriod rabi_period(std::span<const BicRoot> roots);

struct CensusRow {
    int size{0};
    int delta{0};
    RootSearch search;
    std::optional<std::size_t> lattice_bic_count;
};

// One row per delta: first atom at (n_1, n_1 + N), second at (n_1 + delta, n_1 + delta + N).
std::vector<CensusRow> bic_census(int size, std::span<const int> deltas, double g,
                                  const SystemConfig& base, const RootOptions& opts = {},
                                  unsigned workers = 1);

// Copy of base with the leg geometry set from (N, delta), keeping n_1.
SystemConfig with_geometry(const SystemConfig& base, int size, int delta);

}  // namespace giantbic
