// spectrum.hpp - Finite open-chain lattice: Hamiltonian, eigenbasis, bound-state
// classification and exact (spectral) time propagation.
//
// Basis ordering of every vector and matrix in this module:
//   row 0 = first atom excited, row 1 = second atom excited,
//   row 2 + s = photon in lattice position s (s = 0 .. n_c-1).
// Waveguide indices j (the n_1, n_2, m_1, m_2 frame) map to lattice positions
// through a fixed offset that centers the coupling region in the chain.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "giantbic/model.hpp"

namespace giantbic {

struct LatticeHamiltonian {
    int n_c{0};
    int site_offset{0};  // lattice position = waveguide index + site_offset
    Eigen::MatrixXd matrix;

    Eigen::Index dim() const noexcept { return matrix.rows(); }
    Eigen::Index row_of_site(int j) const noexcept { return 2 + j + site_offset; }
    int site_of_row(Eigen::Index row) const noexcept { return static_cast<int>(row) - 2 - site_offset; }
    int first_site() const noexcept { return -site_offset; }
    int last_site() const noexcept { return n_c - 1 - site_offset; }
};

// Minimal chain length accepted by build_hamiltonian.
int minimum_lattice_size(const SystemConfig& cfg) noexcept;

LatticeHamiltonian build_hamiltonian(const SystemConfig& cfg, int n_c);

struct EigenPair {
    double energy{0.0};
    Eigen::VectorXd vector;
};

// Full eigenbasis, energies ascending, eigenvectors as columns.
struct Spectrum {
    int n_c{0};
    int site_offset{0};
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;

    std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
    EigenPair pair(std::size_t i) const;
    double orthonormality_error() const;
    double max_residual(const LatticeHamiltonian& h) const;
};

Spectrum eigendecompose(const LatticeHamiltonian& h);

enum class StateClass { bic, boc, extended };
std::string to_string(StateClass c);

struct ClassifyOptions {
    double ipr_threshold{0.02};
    int window_margin{5};          // sites added on both sides of the coupling region
    double min_window_weight{0.9}; // weight (atoms + photons) inside the window
    double edge_guard{1e-3};       // in units of xi, from each band edge
    double cluster_tol{1e-6};      // energies closer than this form one eigenspace
    // Localized states with less photon weight than this are uncoupled atoms,
    // not bound states of the atom-waveguide system; they are labeled extended.
    double min_photon_weight{1e-10};
};

struct SiteProbability {
    int site{0};
    double prob{0.0};
};

struct BoundStateProfile {
    std::size_t index{0};
    double energy{0.0};
    StateClass kind{StateClass::extended};
    double ipr{0.0};
    double window_weight{0.0};
    double a1{0.0};  // atom amplitudes; sign fixed by a1 >= 0
    double a2{0.0};
    bool ambiguous{false};  // IPR within 20% of the threshold
};

struct Classification {
    // Eigenbasis after rotating each degenerate cluster so that localized and
    // extended components separate. Same energies as the input.
    Spectrum basis;
    std::vector<BoundStateProfile> states;  // one per eigenpair, same order
    ClassifyOptions options;

    std::size_t count(StateClass c) const noexcept;
    std::vector<BoundStateProfile> of_kind(StateClass c) const;
};

Classification classify_bound_states(const Spectrum& spectrum, const SystemConfig& cfg,
                                     const ClassifyOptions& opts = {});

// |B_j|^2 per waveguide site.
std::vector<SiteProbability> photon_profile(const EigenPair& pair, int site_offset);

struct ExactOptions {
    std::vector<double> snapshot_times;  // snapped to the nearest grid node
    int window_lo{0};                    // waveguide index range of snapshots
    int window_hi{-1};                   // window_hi < window_lo: whole chain
    std::size_t norm_stride{100};        // site-basis norm audit every k-th node
};

struct ExactResult {
    AtomTrajectory trajectory;
    std::vector<FieldSnapshot> snapshots;
    double max_norm_deficit{0.0};
    bool wavefront_ok{true};  // false: edge reflections may reach the atoms
    std::vector<std::string> warnings;
};

// Lattice length needed so that emitted wavefronts cannot return to the atoms by t_max.
int wavefront_lattice_size(const SystemConfig& cfg, double t_max, int margin = 20) noexcept;

ExactResult exact_propagate(const Spectrum& spectrum, const SystemConfig& cfg,
                            const WavefunctionState& psi0, const TimeGrid& grid,
                            const ExactOptions& opts = {});

ExactResult exact_propagate(const SystemConfig& cfg, const WavefunctionState& psi0,
                            const TimeGrid& grid, int n_c, const ExactOptions& opts = {});

}  // namespace giantbic
