#include "giantbic/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace giantbic {

int minimum_lattice_size(const SystemConfig& cfg) noexcept {
    return cfg.rightmost_leg() - cfg.leftmost_leg() + 40;
}

LatticeHamiltonian build_hamiltonian(const SystemConfig& raw, int n_c) {
    const SystemConfig cfg = validate_config(raw);
    if (n_c < minimum_lattice_size(cfg)) {
        std::ostringstream os;
        os << "build_hamiltonian: n_c = " << n_c << " too small; need at least "
           << minimum_lattice_size(cfg) << " sites to hold both atoms with margin";
        throw ConfigError(os.str());
    }
    const int span = cfg.rightmost_leg() - cfg.leftmost_leg();

    LatticeHamiltonian h;
    h.n_c = n_c;
    h.site_offset = (n_c - span) / 2 - cfg.leftmost_leg();
    const Eigen::Index dim = n_c + 2;
    h.matrix = Eigen::MatrixXd::Zero(dim, dim);

    h.matrix(0, 0) = cfg.omega_1;
    h.matrix(1, 1) = cfg.omega_2;
    for (Eigen::Index r = 2; r < dim; ++r) {
        h.matrix(r, r) = cfg.omega_c;
        if (r + 1 < dim) {
            h.matrix(r, r + 1) = -cfg.xi;
            h.matrix(r + 1, r) = -cfg.xi;
        }
    }
    for (int leg : cfg.legs_1()) {
        const auto r = h.row_of_site(leg);
        h.matrix(0, r) += cfg.g_1;
        h.matrix(r, 0) += cfg.g_1;
    }
    for (int leg : cfg.legs_2()) {
        const auto r = h.row_of_site(leg);
        h.matrix(1, r) += cfg.g_2;
        h.matrix(r, 1) += cfg.g_2;
    }
    return h;
}

EigenPair Spectrum::pair(std::size_t i) const {
    const auto c = static_cast<Eigen::Index>(i);
    return {energies(c), vectors.col(c)};
}

double Spectrum::orthonormality_error() const {
    const Eigen::MatrixXd gram = vectors.transpose() * vectors;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double Spectrum::max_residual(const LatticeHamiltonian& h) const {
    const Eigen::MatrixXd r = h.matrix * vectors - vectors * energies.asDiagonal();
    return r.colwise().norm().maxCoeff();
}

Spectrum eigendecompose(const LatticeHamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigendecompose: solver did not converge (dim " << h.dim()
           << ", max|H| = " << h.matrix.cwiseAbs().maxCoeff() << ")";
        throw SolverError(os.str());
    }
    return {h.n_c, h.site_offset, solver.eigenvalues(), solver.eigenvectors()};
}

std::string to_string(StateClass c) {
    switch (c) {
        case StateClass::bic: return "BIC";
        case StateClass::boc: return "BOC";
        case StateClass::extended: return "extended";
    }
    return "unknown";
}

std::size_t Classification::count(StateClass c) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(states.begin(), states.end(), [c](const auto& s) { return s.kind == c; }));
}

std::vector<BoundStateProfile> Classification::of_kind(StateClass c) const {
    std::vector<BoundStateProfile> out;
    std::copy_if(states.begin(), states.end(), std::back_inserter(out),
                 [c](const auto& s) { return s.kind == c; });
    return out;
}

Classification classify_bound_states(const Spectrum& spectrum, const SystemConfig& cfg,
                                     const ClassifyOptions& opts) {
    Classification out{spectrum, {}, opts};
    Spectrum& basis = out.basis;
    const Eigen::Index dim = basis.vectors.rows();
    const Eigen::Index n = basis.energies.size();

    // Rows counted as "near the atoms": both atoms plus the widened coupling region.
    Eigen::VectorXd window = Eigen::VectorXd::Zero(dim);
    window(0) = 1.0;
    window(1) = 1.0;
    const int lo = cfg.leftmost_leg() - opts.window_margin;
    const int hi = cfg.rightmost_leg() + opts.window_margin;
    for (int j = lo; j <= hi; ++j) {
        const Eigen::Index r = 2 + j + basis.site_offset;
        if (r >= 2 && r < dim) window(r) = 1.0;
    }

    // Degenerate eigenspaces: rotate onto the eigenvectors of the window-weight
    // operator so that a localized state is not smeared over an extended partner.
    for (Eigen::Index first = 0; first < n;) {
        Eigen::Index last = first;
        while (last + 1 < n && basis.energies(last + 1) - basis.energies(first) < opts.cluster_tol) ++last;
        const Eigen::Index width = last - first + 1;
        if (width > 1) {
            const Eigen::MatrixXd block = basis.vectors.middleCols(first, width);
            const Eigen::MatrixXd w = block.transpose() * window.asDiagonal() * block;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
            const Eigen::MatrixXd rotated = block * es.eigenvectors().rowwise().reverse();
            basis.vectors.middleCols(first, width) = rotated;
        }
        first = last + 1;
    }

    const double in_lo = cfg.band_bottom() + opts.edge_guard * cfg.xi;
    const double in_hi = cfg.band_top() - opts.edge_guard * cfg.xi;
    out.states.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < n; ++q) {
        auto v = basis.vectors.col(q);
        if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;

        BoundStateProfile s;
        s.index = static_cast<std::size_t>(q);
        s.energy = basis.energies(q);
        s.ipr = v.array().pow(4).sum();
        s.window_weight = (v.array().square() * window.array()).sum();
        s.a1 = v(0);
        s.a2 = v(1);
        s.ambiguous = std::abs(s.ipr - opts.ipr_threshold) <= 0.2 * opts.ipr_threshold;

        const bool dressed = 1.0 - s.a1 * s.a1 - s.a2 * s.a2 >= opts.min_photon_weight;
        const bool localized = dressed && s.ipr >= opts.ipr_threshold;
        const bool outside = s.energy < cfg.band_bottom() || s.energy > cfg.band_top();
        const bool inside = s.energy > in_lo && s.energy < in_hi;
        if (outside && localized) {
            s.kind = StateClass::boc;
        } else if (inside && localized && s.window_weight >= opts.min_window_weight) {
            s.kind = StateClass::bic;
        }
        out.states.push_back(s);
    }
    return out;
}

std::vector<SiteProbability> photon_profile(const EigenPair& pair, int site_offset) {
    const Eigen::Index dim = pair.vector.size();
    std::vector<SiteProbability> out;
    out.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(dim - 2, 0)));
    for (Eigen::Index r = 2; r < dim; ++r) {
        const double b = pair.vector(r);
        out.push_back({static_cast<int>(r) - 2 - site_offset, b * b});
    }
    return out;
}

int wavefront_lattice_size(const SystemConfig& cfg, double t_max, int margin) noexcept {
    const int span = cfg.rightmost_leg() - cfg.leftmost_leg();
    return span + static_cast<int>(std::ceil(2.0 * cfg.xi * t_max)) + margin;
}

ExactResult exact_propagate(const Spectrum& spectrum, const SystemConfig& cfg,
                            const WavefunctionState& psi0, const TimeGrid& grid,
                            const ExactOptions& opts) {
    const Eigen::Index dim = spectrum.vectors.rows();
    const Eigen::Index n_states = spectrum.energies.size();
    ExactResult res;

    if (spectrum.n_c < wavefront_lattice_size(cfg, grid.last_time())) {
        res.wavefront_ok = false;
        std::ostringstream os;
        os << "exact_propagate: n_c = " << spectrum.n_c << " < " << wavefront_lattice_size(cfg, grid.last_time())
           << "; edge reflections can reach the atoms before t = " << grid.last_time();
        res.warnings.push_back(os.str());
    }

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = psi0.alpha_1;
    psi(1) = psi0.alpha_2;
    for (const auto& [site, amp] : psi0.beta) {
        const Eigen::Index r = 2 + site + spectrum.site_offset;
        if (r < 2 || r >= dim) throw ConfigError("exact_propagate: initial photon outside the lattice");
        psi(r) = amp;
    }
    const Eigen::VectorXcd coeff = spectrum.vectors.transpose().cast<cplx>() * psi;
    const double norm0 = psi.squaredNorm();

    const Eigen::RowVectorXcd row_a1 = spectrum.vectors.row(0).cast<cplx>();
    const Eigen::RowVectorXcd row_a2 = spectrum.vectors.row(1).cast<cplx>();

    std::vector<std::size_t> snap_nodes;
    for (double t : opts.snapshot_times) snap_nodes.push_back(grid.nearest_index(t));
    std::sort(snap_nodes.begin(), snap_nodes.end());
    snap_nodes.erase(std::unique(snap_nodes.begin(), snap_nodes.end()), snap_nodes.end());

    int w_lo = opts.window_lo;
    int w_hi = opts.window_hi;
    if (w_hi < w_lo) {
        w_lo = -spectrum.site_offset;
        w_hi = spectrum.n_c - 1 - spectrum.site_offset;
    }
    w_lo = std::max(w_lo, -spectrum.site_offset);
    w_hi = std::min(w_hi, spectrum.n_c - 1 - spectrum.site_offset);

    const std::size_t nodes = grid.nodes();
    res.trajectory.times.resize(nodes);
    res.trajectory.alpha_1.resize(nodes);
    res.trajectory.alpha_2.resize(nodes);

    Eigen::VectorXcd evolved(n_states);
    auto snap_it = snap_nodes.begin();
    for (std::size_t k = 0; k < nodes; ++k) {
        const double t = grid.time(k);
        for (Eigen::Index q = 0; q < n_states; ++q) {
            evolved(q) = coeff(q) * std::polar(1.0, -spectrum.energies(q) * t);
        }
        res.trajectory.times[k] = t;
        res.trajectory.alpha_1[k] = row_a1 * evolved;
        res.trajectory.alpha_2[k] = row_a2 * evolved;

        const bool snapshot = snap_it != snap_nodes.end() && *snap_it == k;
        const bool audit = opts.norm_stride > 0 && (k % opts.norm_stride == 0 || k + 1 == nodes);
        if (snapshot || audit) {
            // Real eigenvectors: transform the real and imaginary parts separately.
            const Eigen::VectorXd re = spectrum.vectors * evolved.real();
            const Eigen::VectorXd im = spectrum.vectors * evolved.imag();
            const double norm = re.squaredNorm() + im.squaredNorm();
            res.max_norm_deficit = std::max(res.max_norm_deficit, std::abs(norm - norm0));
            if (snapshot) {
                FieldSnapshot snap;
                snap.time = t;
                snap.first_site = w_lo;
                for (int j = w_lo; j <= w_hi; ++j) {
                    const Eigen::Index r = 2 + j + spectrum.site_offset;
                    snap.beta.emplace_back(re(r), im(r));
                }
                res.snapshots.push_back(std::move(snap));
                ++snap_it;
            }
        }
    }
    return res;
}

ExactResult exact_propagate(const SystemConfig& cfg, const WavefunctionState& psi0,
                            const TimeGrid& grid, int n_c, const ExactOptions& opts) {
    const auto h = build_hamiltonian(cfg, n_c);
    return exact_propagate(eigendecompose(h), validate_config(cfg), psi0, grid, opts);
}

}  // namespace giantbic
