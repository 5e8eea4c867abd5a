// density.hpp - density operators, validity checks and expectation values

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "wgmqed/errors.hpp"
#include "wgmqed/quantum/space.hpp"

namespace wgm::quantum {

struct DensityDiagnostics {
    double hermiticity_error = 0.0;  // max |rho - rho^dag|
    double trace_error = 0.0;        // |tr rho - 1|
    double min_eigenvalue = 0.0;

    bool ok(double herm_tol = 1e-10, double trace_tol = 1e-10, double eig_tol = -1e-8) const {
        return hermiticity_error <= herm_tol && trace_error <= trace_tol && min_eigenvalue >= eig_tol;
    }
};

struct DensityOperator {
    DenseMatrix matrix;

    std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }

    Eigen::VectorXcd vectorized() const { return Eigen::Map<const Eigen::VectorXcd>(matrix.data(), matrix.size()); }

    static DensityOperator from_vector(const Eigen::VectorXcd& v, std::size_t dim) {
        return {Eigen::Map<const DenseMatrix>(v.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
    }

    static DensityOperator pure(std::size_t dim, std::size_t index) {
        DensityOperator r{DenseMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
        r.matrix(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
        return r;
    }

    DensityDiagnostics diagnostics() const {
        DensityDiagnostics d;
        d.hermiticity_error = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        d.trace_error = std::abs(matrix.trace() - cplx(1.0));
        const DenseMatrix herm = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
        d.min_eigenvalue = es.eigenvalues().minCoeff();
        return d;
    }
};

inline void require_valid(const DensityOperator& rho, const std::string& context) {
    const auto d = rho.diagnostics();
    if (!d.ok())
        throw ConvergenceError(context + ": invalid density operator (hermiticity " +
                               std::to_string(d.hermiticity_error) + ", trace " + std::to_string(d.trace_error) +
                               ", min eigenvalue " + std::to_string(d.min_eigenvalue) + ")");
}

template <typename Op>
cplx expectation(const Op& op, const DensityOperator& rho) {
    if (op.rows() != rho.matrix.rows() || op.cols() != rho.matrix.cols())
        throw DomainError("operator and density operator dimensions differ");
    return (op * rho.matrix).trace();
}

// Reduced atomic state: partial trace over both modes.
inline DenseMatrix atomic_state(const CompositeSpace& space, const DensityOperator& rho) {
    const auto nl = static_cast<Eigen::Index>(space.levels());
    DenseMatrix r = DenseMatrix::Zero(nl, nl);
    for (Eigen::Index i = 0; i < nl; ++i)
        for (Eigen::Index j = 0; j < nl; ++j)
            for (int na = 0; na <= space.cutoff_a; ++na)
                for (int nb = 0; nb <= space.cutoff_b; ++nb)
                    r(i, j) += rho.matrix(space.index(i, na, nb), space.index(j, na, nb));
    return r;
}

// Atomic state x vacuum of both modes.
inline DensityOperator with_vacuum(const CompositeSpace& space, const DenseMatrix& atom_rho) {
    const auto dim = static_cast<Eigen::Index>(space.dim());
    DensityOperator r{DenseMatrix::Zero(dim, dim)};
    for (Eigen::Index i = 0; i < atom_rho.rows(); ++i)
        for (Eigen::Index j = 0; j < atom_rho.cols(); ++j)
            r.matrix(space.index(i, 0, 0), space.index(j, 0, 0)) = atom_rho(i, j);
    return r;
}

}  // namespace wgm::quantum
