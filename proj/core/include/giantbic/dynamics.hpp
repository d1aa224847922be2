// dynamics.hpp - Single-excitation dynamics of the two atoms on the infinite chain.
//
// Eliminating the waveguide exactly gives the memory equations
//
//   d alpha_1/dt = -i Omega_1 alpha_1 - 2 g_1^2 (K_1 * alpha_1)(t) - g_1 g_2 (K_c * alpha_2)(t)
//   d alpha_2/dt = -i Omega_2 alpha_2 - 2 g_2^2 (K_2 * alpha_2)(t) - g_1 g_2 (K_c * alpha_1)(t)
//
// with (K * a)(t) = int_0^t K(tau) a(t - tau) dtau and Bessel kernels
//
//   K_i(tau) = e^{-i omega_c tau} [J_0(2 xi tau) + i^{N_i} J_{N_i}(2 xi tau)]
//   K_c(tau) = e^{-i omega_c tau} sum_{j,j'} i^{n_j - m_j'} J_{n_j - m_j'}(2 xi tau).
//
// The photon amplitudes follow from the atomic history by one more convolution.

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "giantbic/model.hpp"

namespace giantbic {

struct Classification;

// i^p for any integer p, by lookup on p mod 4.
cplx i_pow(int p) noexcept;

struct KernelSet {
    double dt{0.0};
    std::vector<cplx> self_1;  // K_1 at tau_n = n dt
    std::vector<cplx> self_2;  // K_2
    std::vector<cplx> cross;   // K_c

    std::size_t size() const noexcept { return self_1.size(); }
};

KernelSet build_kernels(const SystemConfig& cfg, const TimeGrid& grid);

// e^{-i omega_c tau} i^p J_p(2 xi tau) on the grid; the building block of K_c.
std::vector<cplx> cross_kernel_term(int p, const SystemConfig& cfg, const TimeGrid& grid);

// Running trapezoid integrals of the kernels, giving M(t) at every node.
struct MemoryIntegrals {
    std::vector<cplx> a1;  // A_1(t_n)
    std::vector<cplx> a2;  // A_2(t_n)
    std::vector<cplx> b;   // B(t_n)
};

MemoryIntegrals memory_integrals(const SystemConfig& cfg, const KernelSet& kernels);

// M(t) = [[A_1, B], [B, A_2]], A_i = Omega_i - 2 i g_i^2 int K_i, B = -i g_1 g_2 int K_c.
Eigen::Matrix2cd m_matrix(const SystemConfig& cfg, const TimeGrid& grid, double t, const KernelSet& kernels);

struct EigenTrace {
    std::vector<double> times;
    std::vector<cplx> lambda_1;
    std::vector<cplx> lambda_2;
    MemoryIntegrals entries;
};

// Closed-form eigenvalues of M(t), ordered along each curve by continuity.
EigenTrace m_eigenvalues_trace(const SystemConfig& cfg, const TimeGrid& grid);

struct VolterraOptions {
    double blowup_tolerance{1e-3};  // abort when |alpha|^2 exceeds 1 + this
};

// Implicit trapezoidal product integration of the memory equations.
AtomTrajectory solve_volterra(const SystemConfig& cfg, const WavefunctionState& psi0, const TimeGrid& grid,
                              const KernelSet& kernels, const VolterraOptions& opts = {});
AtomTrajectory solve_volterra(const SystemConfig& cfg, const WavefunctionState& psi0, const TimeGrid& grid,
                              const VolterraOptions& opts = {});

// beta_j(t) = -i g_1 int alpha_1(t - tau) F_j(tau) dtau - i g_2 int alpha_2(t - tau) G_j(tau) dtau.
// Times are snapped to the trajectory grid; sites lo..hi are waveguide indices.
std::vector<FieldSnapshot> photon_field(const SystemConfig& cfg, const AtomTrajectory& trajectory,
                                        int site_lo, int site_hi, const std::vector<double>& times);

struct NormCheck {
    double deficit{0.0};
    bool window_ok{true};  // window reaches 2 xi t + 20 sites beyond the atoms
};

NormCheck norm_check(const SystemConfig& cfg, const AtomTrajectory& trajectory, const FieldSnapshot& field);

// Smallest symmetric window around the atoms that contains all radiation at time t.
std::pair<int, int> radiation_window(const SystemConfig& cfg, double t) noexcept;

struct SteadyState {
    double population_1{0.0};
    double population_2{0.0};
    double bic_energy{0.0};
};

// Long-time populations left behind by the single BIC of the lattice classification.
SteadyState steady_state_prediction(const Classification& lattice, const WavefunctionState& psi0);

struct Plateau {
    bool reached{false};
    double time{0.0};
    double population_1{0.0};
    double population_2{0.0};
};

// First time at which the trailing-window means of both populations differ from
// the means over the preceding window by less than rel_tol (relative).
// Population values are the means over the final window.
Plateau detect_plateau(const AtomTrajectory& trajectory, double window = 50.0, double rel_tol = 1e-4);

}  // namespace giantbic
