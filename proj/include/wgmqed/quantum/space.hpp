// space.hpp - composite Hilbert space atom x mode a x mode b and its operators
//
// Basis ordering: atom index slowest, then photon number of mode a, then
// photon number of mode b:
//
//     index = (level * (cutoff_a + 1) + n_a) * (cutoff_b + 1) + n_b
//
// Mode a is the "+" propagation sense, mode b the "-" sense.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wgmqed/atom.hpp"
#include "wgmqed/errors.hpp"

namespace wgm::quantum {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using DenseMatrix = Eigen::MatrixXcd;
using Triplet = Eigen::Triplet<cplx>;

// Largest Hilbert-space dimension accepted without an explicit budget. The
// Liouvillian then has dim^2 rows.
inline constexpr std::size_t default_dimension_budget = 200;

struct CompositeSpace {
    atom::AtomModel atom;
    int cutoff_a = 1;
    int cutoff_b = 1;

    std::size_t levels() const { return atom.levels.size(); }
    std::size_t photon_states() const { return static_cast<std::size_t>((cutoff_a + 1) * (cutoff_b + 1)); }
    std::size_t dim() const { return levels() * photon_states(); }

    std::size_t index(std::size_t level, int n_a, int n_b) const {
        return (level * (cutoff_a + 1) + n_a) * (cutoff_b + 1) + n_b;
    }
};

inline CompositeSpace build_space(atom::AtomModel atom_model, int cutoff_a, int cutoff_b,
                                  std::size_t dimension_budget = default_dimension_budget) {
    if (atom_model.levels.empty())
        throw DomainError("level list must not be empty");
    if (cutoff_a < 1 || cutoff_b < 1)
        throw DomainError("photon cutoffs must be at least 1");
    CompositeSpace space{std::move(atom_model), cutoff_a, cutoff_b};
    if (space.dim() > dimension_budget)
        throw CapacityError("Hilbert space dimension " + std::to_string(space.dim()) + " exceeds the budget of " +
                            std::to_string(dimension_budget) +
                            "; prune atomic levels or lower the photon cutoffs");
    return space;
}

struct Operators {
    SparseMatrix identity;
    SparseMatrix a;
    SparseMatrix b;
    std::array<SparseMatrix, 3> sigma;  // atomic lowering per q, indexed q + 1
    std::vector<SparseMatrix> projectors;  // |level><level| x 1
};

inline SparseMatrix from_triplets(std::size_t dim, const std::vector<Triplet>& t) {
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

// The truncated annihilation operators satisfy [a, a^dag] = 1 except on the
// highest Fock state, where the commutator equals -cutoff.
inline Operators build_operators(const CompositeSpace& space) {
    const std::size_t dim = space.dim();
    std::vector<Triplet> id, ta, tb;
    for (std::size_t l = 0; l < space.levels(); ++l)
        for (int na = 0; na <= space.cutoff_a; ++na)
            for (int nb = 0; nb <= space.cutoff_b; ++nb) {
                const std::size_t i = space.index(l, na, nb);
                id.emplace_back(i, i, 1.0);
                if (na > 0)
                    ta.emplace_back(space.index(l, na - 1, nb), i, std::sqrt(double(na)));
                if (nb > 0)
                    tb.emplace_back(space.index(l, na, nb - 1), i, std::sqrt(double(nb)));
            }

    Operators ops;
    ops.identity = from_triplets(dim, id);
    ops.a = from_triplets(dim, ta);
    ops.b = from_triplets(dim, tb);

    std::array<std::vector<Triplet>, 3> sig;
    for (const auto& t : space.atom.transitions.entries) {
        const auto g = space.atom.index_of(atom::Manifold::ground, t.m_g);
        const auto e = space.atom.index_of(atom::Manifold::excited, t.m_e);
        if (!g || !e)
            continue;
        for (int na = 0; na <= space.cutoff_a; ++na)
            for (int nb = 0; nb <= space.cutoff_b; ++nb)
                sig[t.q + 1].emplace_back(space.index(*g, na, nb), space.index(*e, na, nb), t.amplitude);
    }
    for (int k = 0; k < 3; ++k)
        ops.sigma[k] = from_triplets(dim, sig[k]);

    for (std::size_t l = 0; l < space.levels(); ++l) {
        std::vector<Triplet> p;
        for (int na = 0; na <= space.cutoff_a; ++na)
            for (int nb = 0; nb <= space.cutoff_b; ++nb) {
                const std::size_t i = space.index(l, na, nb);
                p.emplace_back(i, i, 1.0);
            }
        ops.projectors.push_back(from_triplets(dim, p));
    }
    return ops;
}

}  // namespace wgm::quantum
