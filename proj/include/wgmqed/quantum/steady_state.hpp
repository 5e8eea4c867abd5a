// steady_state.hpp - null vector of the Lindblad generator
//
// L vec(rho) = 0 has a one-dimensional solution space for generic damped,
// driven systems. Because L preserves Hermiticity, rho is parameterized by
// dim^2 real unknowns (populations, then Re/Im of the strict upper triangle)
// and only the matching rows of L are kept, which gives a real linear system
// of the same size. One population equation is replaced by tr(rho) = 1: the
// one with the largest diagonal magnitude, first index on ties. (Coherence
// rows are not linearly dependent on the others and cannot be replaced.)
//
// Small systems use a dense full-pivoting LU, which also detects rank
// deficiency exactly. Larger systems use UMFPACK when available and Eigen's
// SparseLU otherwise; the symbolic analysis is reused while the sparsity
// pattern does not change (e.g. along a detuning sweep).

#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#ifdef WGMQED_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "wgmqed/errors.hpp"
#include "wgmqed/quantum/density.hpp"
#include "wgmqed/quantum/system.hpp"

namespace wgm::quantum {

using RealSparse = Eigen::SparseMatrix<double>;

struct SteadyStateOptions {
    std::size_t dense_limit = 256;  // real unknowns solved with the dense LU
    double residual_tolerance = 1e-8;
    bool check_density = true;
};

// Index map of the real Hermitian parameterization.
class HermitianPacking {
  public:
    explicit HermitianPacking(std::size_t dim) : dim_(static_cast<Eigen::Index>(dim)) {}

    Eigen::Index size() const { return dim_ * dim_; }
    Eigen::Index population(Eigen::Index i) const { return i; }
    // Re part of rho(i, j), i < j; the Im part follows at +1.
    Eigen::Index real_part(Eigen::Index i, Eigen::Index j) const {
        return dim_ + 2 * (i * dim_ - i * (i + 1) / 2 + (j - i - 1));
    }

    DenseMatrix unpack(const Eigen::VectorXd& x) const {
        DenseMatrix rho(dim_, dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) {
            rho(i, i) = x(i);
            for (Eigen::Index j = i + 1; j < dim_; ++j) {
                const Eigen::Index k = real_part(i, j);
                rho(i, j) = cplx(x(k), x(k + 1));
                rho(j, i) = cplx(x(k), -x(k + 1));
            }
        }
        return rho;
    }

  private:
    Eigen::Index dim_;
};

// Real representation of L restricted to Hermitian operators, with row
// `replaced` overwritten by the trace functional.
inline RealSparse real_generator(const Liouvillian& L, Eigen::Index replaced) {
    const auto dim = static_cast<Eigen::Index>(L.dim);
    const HermitianPacking pack(L.dim);
    const cplx i_unit(0.0, 1.0);

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(2 * L.generator.nonZeros() + pack.size()));
    for (Eigen::Index c = 0; c < L.generator.outerSize(); ++c) {
        const Eigen::Index k = c % dim;
        const Eigen::Index l = c / dim;
        for (SparseMatrix::InnerIterator it(L.generator, c); it; ++it) {
            const Eigen::Index i = it.row() % dim;
            const Eigen::Index j = it.row() / dim;
            if (i > j)
                continue;
            auto emit = [&](cplx coef, Eigen::Index unknown) {
                const cplx v = it.value() * coef;
                if (i == j) {
                    if (i != replaced)
                        t.emplace_back(i, unknown, v.real());
                } else {
                    const Eigen::Index r = pack.real_part(i, j);
                    t.emplace_back(r, unknown, v.real());
                    t.emplace_back(r + 1, unknown, v.imag());
                }
            };
            if (k == l) {
                emit(1.0, k);
            } else if (k < l) {
                emit(1.0, pack.real_part(k, l));
                emit(i_unit, pack.real_part(k, l) + 1);
            } else {
                emit(1.0, pack.real_part(l, k));
                emit(-i_unit, pack.real_part(l, k) + 1);
            }
        }
    }
    for (Eigen::Index i = 0; i < dim; ++i)
        t.emplace_back(replaced, i, 1.0);
    // explicit diagonal keeps the pattern independent of accidental zeros
    for (Eigen::Index r = 0; r < pack.size(); ++r)
        t.emplace_back(r, r, 0.0);

    RealSparse A(pack.size(), pack.size());
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

namespace detail {

inline Eigen::Index trace_row(const SparseMatrix& gen, Eigen::Index dim) {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Eigen::Index k = i + i * dim;
        const double mag = std::abs(gen.coeff(k, k));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

inline bool same_pattern(const RealSparse& a, const RealSparse& b) {
    if (a.rows() != b.rows() || a.nonZeros() != b.nonZeros())
        return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

}  // namespace detail

// Reusable solver; holds the symbolic factorization of the last pattern seen.
// Not thread-safe: use one instance per thread.
class SteadyStateSolver {
  public:
    explicit SteadyStateSolver(SteadyStateOptions opt = {}) : opt_(opt) {}

    DensityOperator solve(const Liouvillian& L) {
        const auto dim = static_cast<Eigen::Index>(L.dim);
        const HermitianPacking pack(L.dim);
        const Eigen::Index replaced = detail::trace_row(L.generator, dim);
        const RealSparse A = real_generator(L, replaced);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(pack.size());
        rhs(replaced) = 1.0;

        Eigen::VectorXd x;
        if (static_cast<std::size_t>(pack.size()) <= opt_.dense_limit)
            x = solve_dense(A, rhs);
        else
            x = solve_sparse(A, rhs);
        if (!x.allFinite())
            throw NonUniqueSteadyStateError("steady state is not unique (non-finite solution)");

        DensityOperator rho{pack.unpack(x)};
        const Eigen::VectorXcd v = rho.vectorized();
        const double residual = (L.generator * v).norm();
        const double scale = L.generator.norm() * std::max(1.0, v.norm());
        if (residual > opt_.residual_tolerance * scale)
            throw ConvergenceError("steady-state residual " + std::to_string(residual) + " exceeds tolerance");
        if (opt_.check_density)
            require_valid(rho, "steady state");
        return rho;
    }

  private:
    static Eigen::VectorXd solve_dense(const RealSparse& A, const Eigen::VectorXd& rhs) {
        const Eigen::MatrixXd dense(A);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
        if (lu.rank() < dense.rows())
            throw NonUniqueSteadyStateError("steady state is not unique (generator null space dimension " +
                                            std::to_string(dense.rows() - lu.rank() + 1) + ")");
        return lu.solve(rhs);
    }

    Eigen::VectorXd solve_sparse(const RealSparse& A, const Eigen::VectorXd& rhs) {
        if (!lu_ || !detail::same_pattern(A, pattern_)) {
            lu_ = std::make_unique<SparseSolver>();
            lu_->analyzePattern(A);
            pattern_ = A;
        }
        lu_->factorize(A);
        if (lu_->info() != Eigen::Success) {
            lu_.reset();
            throw NonUniqueSteadyStateError(
                "sparse factorization failed: singular generator (non-unique steady state) or "
                "insufficient memory for the fill-in");
        }
        Eigen::VectorXd x = lu_->solve(rhs);
        if (lu_->info() != Eigen::Success)
            throw NonUniqueSteadyStateError("steady-state back substitution failed");
        return x;
    }

#ifdef WGMQED_HAVE_UMFPACK
    using SparseSolver = Eigen::UmfPackLU<RealSparse>;
#else
    using SparseSolver = Eigen::SparseLU<RealSparse, Eigen::COLAMDOrdering<int>>;
#endif

    SteadyStateOptions opt_;
    std::unique_ptr<SparseSolver> lu_;
    RealSparse pattern_;
};

inline DensityOperator steady_state(const Liouvillian& L, const SteadyStateOptions& opt = {}) {
    SteadyStateSolver solver(opt);
    return solver.solve(L);
}

}  // namespace wgm::quantum
