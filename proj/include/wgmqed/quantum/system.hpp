// system.hpp - generalized Jaynes-Cummings Hamiltonian and Lindblad generator
//
// Rate conventions: kappa0, kappa_ext and gamma are field (amplitude) decay
// rates, so every collapse operator carries sqrt(2 * rate). The empty-cavity
// intensity response is then a Lorentzian with HWHM kappa0 + kappa_ext.
//
// Frame: rotating at the probe frequency omega_s.
//   delta_cs = omega_r - omega_s   (resonator - probe)
//   delta_ca = omega_r - omega_a   (resonator - reference atomic line)
// The reference line carries Zeeman shift `line_offset`, which is removed
// from all excited-state energies so that delta_ca = 0 puts the resonator on
// the reference transition.
//
// Drive: H_drive = sqrt(2 kappa_ext) alpha_in (d + d^dag) on the driven mode
// d. With this phase the empty-cavity field is
// <d> = -i sqrt(2 kappa_ext) alpha_in / (kappa + i delta_cs) and the fibre
// output is alpha_out = alpha_in - i sqrt(2 kappa_ext) <d>.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "wgmqed/atom.hpp"
#include "wgmqed/errors.hpp"
#include "wgmqed/fields.hpp"
#include "wgmqed/quantum/space.hpp"

namespace wgm::quantum {

enum class DrivenMode { a, b };

using Couplings = std::array<cplx, 3>;  // u_q indexed by q + 1

struct SystemParams {
    double g0 = 0.0;         // coupling of a unit-strength transition to a fully overlapping mode
    double kappa0 = 0.0;     // intrinsic field decay
    double kappa_ext = 0.0;  // fibre coupling field decay
    double gamma = 0.0;      // atomic amplitude decay
    double delta_cs = 0.0;
    double delta_ca = 0.0;
    DrivenMode drive_mode = DrivenMode::a;
    double alpha_in = 0.0;  // sqrt(photons / s)
    Couplings u_a{};
    Couplings u_b{};
    double azimuth_phase = 0.0;
    double line_offset = 0.0;
    double backscatter = 0.0;  // h (a^dag b + b^dag a), zero in all paper scenarios

    double kappa_tot() const { return kappa0 + kappa_ext; }
    double delta_as() const { return delta_cs - delta_ca; }

    void set_polarizations(const fields::ModePolarization& pol_a, const fields::ModePolarization& pol_b) {
        u_a = fields::mode_couplings(pol_a);
        u_b = fields::mode_couplings(pol_b);
    }
};

// Zeeman shift of the transition m_g -> m_e, suitable for `line_offset`.
inline double transition_shift(const atom::AtomModel& model, int m_g, int m_e) {
    const auto& g = model.levels[model.require_index(atom::Manifold::ground, m_g)];
    const auto& e = model.levels[model.require_index(atom::Manifold::excited, m_e)];
    return e.energy_shift - g.energy_shift;
}

inline void validate(const SystemParams& p) {
    if (!(p.kappa0 > 0.0 && p.kappa_ext > 0.0 && p.gamma > 0.0))
        throw DomainError("kappa0, kappa_ext and gamma must be positive");
    if (p.g0 < 0.0 || p.alpha_in < 0.0)
        throw DomainError("g0 and alpha_in must be non-negative");
    for (const Couplings* u : {&p.u_a, &p.u_b}) {
        double s = 0.0;
        for (const auto& c : *u)
            s += std::norm(c);
        // an uncoupled mode (all u_q = 0) is allowed
        if (std::abs(s - 1.0) > 1e-9 && s > 1e-12)
            throw ConsistencyError("polarization overlaps of a mode must sum to 1 (got " + std::to_string(s) + ")");
    }
}

inline SparseMatrix adjoint(const SparseMatrix& m) { return SparseMatrix(m.adjoint()); }

inline SparseMatrix build_hamiltonian(const CompositeSpace& space, const Operators& ops, const SystemParams& p) {
    validate(p);
    const auto& A = ops.a;
    const auto& B = ops.b;
    SparseMatrix H = p.delta_cs * (adjoint(A) * A + adjoint(B) * B);

    for (std::size_t l = 0; l < space.levels(); ++l) {
        const auto& level = space.atom.levels[l];
        double energy = level.energy_shift;
        if (level.manifold == atom::Manifold::excited)
            energy += p.delta_as() - p.line_offset;
        if (energy != 0.0)
            H += energy * ops.projectors[l];
    }

    const cplx phase_a = std::polar(1.0, p.azimuth_phase);
    const cplx phase_b = std::polar(1.0, -p.azimuth_phase);
    SparseMatrix coupling(H.rows(), H.cols());
    for (int k = 0; k < 3; ++k) {
        const SparseMatrix raise = adjoint(ops.sigma[k]);
        if (p.u_a[k] != 0.0)
            coupling += (p.g0 * p.u_a[k] * phase_a) * SparseMatrix(raise * A);
        if (p.u_b[k] != 0.0)
            coupling += (p.g0 * p.u_b[k] * phase_b) * SparseMatrix(raise * B);
    }
    H += coupling + adjoint(coupling);

    if (p.backscatter != 0.0)
        H += p.backscatter * SparseMatrix(adjoint(A) * B + adjoint(B) * A);

    if (p.alpha_in != 0.0) {
        const SparseMatrix& d = p.drive_mode == DrivenMode::a ? A : B;
        H += (std::sqrt(2.0 * p.kappa_ext) * p.alpha_in) * SparseMatrix(d + adjoint(d));
    }
    H.prune(cplx(0.0));
    H.makeCompressed();

    const double scale = std::max(1.0, SparseMatrix(H).norm());
    if (SparseMatrix(H - adjoint(H)).norm() > 1e-12 * scale)
        throw ConsistencyError("Hamiltonian is not Hermitian");
    return H;
}

inline std::vector<SparseMatrix> collapse_operators(const CompositeSpace& space, const Operators& ops,
                                                    const SystemParams& p) {
    validate(p);
    // validates the branching normalization of unpruned schemes
    atom::decay_channels(space.atom.transitions, p.gamma, !space.atom.pruned);

    std::vector<SparseMatrix> c;
    c.push_back(std::sqrt(2.0 * p.kappa0) * ops.a);
    c.push_back(std::sqrt(2.0 * p.kappa_ext) * ops.a);
    c.push_back(std::sqrt(2.0 * p.kappa0) * ops.b);
    c.push_back(std::sqrt(2.0 * p.kappa_ext) * ops.b);
    for (const auto& s : ops.sigma)
        if (s.nonZeros() > 0)
            c.push_back(std::sqrt(2.0 * p.gamma) * s);
    return c;
}

// Generator on column-major vectorized density operators:
// vec(X rho Y) = (Y^T kron X) vec(rho), index(i, j) = i + j * dim.
struct Liouvillian {
    std::size_t dim = 0;
    SparseMatrix generator;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& rho_vec) const { return generator * rho_vec; }
};

namespace detail {

// Appends scale * (X kron Y) to `out`.
inline void kron_into(std::vector<Triplet>& out, const SparseMatrix& X, const SparseMatrix& Y, cplx scale) {
    const Eigen::Index n = Y.rows();
    for (Eigen::Index cx = 0; cx < X.outerSize(); ++cx)
        for (SparseMatrix::InnerIterator ix(X, cx); ix; ++ix)
            for (Eigen::Index cy = 0; cy < Y.outerSize(); ++cy)
                for (SparseMatrix::InnerIterator iy(Y, cy); iy; ++iy)
                    out.emplace_back(ix.row() * n + iy.row(), ix.col() * n + iy.col(), scale * ix.value() * iy.value());
}

}  // namespace detail

inline Liouvillian build_liouvillian(const SparseMatrix& H, const std::vector<SparseMatrix>& collapse) {
    const std::size_t dim = static_cast<std::size_t>(H.rows());
    SparseMatrix I(H.rows(), H.cols());
    I.setIdentity();
    const cplx i_unit(0.0, 1.0);

    std::vector<Triplet> t;
    detail::kron_into(t, I, H, -i_unit);
    detail::kron_into(t, SparseMatrix(H.transpose()), I, i_unit);
    for (const auto& c : collapse) {
        const SparseMatrix cdc = adjoint(c) * c;
        detail::kron_into(t, SparseMatrix(c.conjugate()), c, 1.0);
        detail::kron_into(t, I, cdc, -0.5);
        detail::kron_into(t, SparseMatrix(cdc.transpose()), I, -0.5);
    }

    Liouvillian L;
    L.dim = dim;
    L.generator = from_triplets(dim * dim, t);
    L.generator.prune(cplx(0.0));
    return L;
}

inline Liouvillian build_liouvillian(const CompositeSpace& space, const Operators& ops, const SparseMatrix& H,
                                     const SystemParams& p) {
    return build_liouvillian(H, collapse_operators(space, ops, p));
}

}  // namespace wgm::quantum
