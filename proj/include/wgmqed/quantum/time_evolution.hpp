// time_evolution.hpp - d rho/dt = L[rho] with an adaptive Dormand-Prince 5(4)
// integrator. Each stage is a linear combination of L applied to states, so
// tr(rho) is conserved to rounding error.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wgmqed/errors.hpp"
#include "wgmqed/quantum/density.hpp"
#include "wgmqed/quantum/system.hpp"

namespace wgm::quantum {

struct EvolutionOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double min_step = 1e-18;  // s
    std::size_t max_steps = 5'000'000;
};

struct EvolutionStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

using StateObserver = std::function<void(std::size_t index, double t, const Eigen::VectorXcd& rho_vec)>;

namespace detail {

struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // b - b_hat (fifth minus embedded fourth order weights)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

// Integrates from t_grid.front() (where the state is rho0) through every grid
// point, calling `observe` at each one, including the first.
inline EvolutionStats evolve_observed(const DensityOperator& rho0, const Liouvillian& L,
                                      const std::vector<double>& t_grid, const StateObserver& observe,
                                      const EvolutionOptions& opt = {}) {
    if (t_grid.empty())
        return {};
    if (rho0.dim() != L.dim)
        throw DomainError("initial state and generator dimensions differ");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw DomainError("time grid must be strictly increasing");

    using D = detail::DormandPrince;
    const SparseMatrix& G = L.generator;
    Eigen::VectorXcd y = rho0.vectorized();
    observe(0, t_grid.front(), y);

    double max_rate = 0.0;
    for (Eigen::Index k = 0; k < G.rows(); ++k)
        max_rate = std::max(max_rate, std::abs(G.coeff(k, k)));
    double h = max_rate > 0.0 ? 0.1 / max_rate : (t_grid.back() - t_grid.front());

    EvolutionStats stats;
    Eigen::VectorXcd k1 = G * y, k2, k3, k4, k5, k6, k7, tmp, y_new;
    double t = t_grid.front();
    for (std::size_t target = 1; target < t_grid.size(); ++target) {
        const double t_end = t_grid[target];
        while (t < t_end) {
            if (stats.accepted + stats.rejected > opt.max_steps)
                throw StiffnessError("step budget exhausted; lower the photon cutoffs or prune atomic levels");
            const bool last = t + h >= t_end;
            const double step = last ? t_end - t : h;

            tmp = y + step * D::a21 * k1;
            k2 = G * tmp;
            tmp = y + step * (D::a31 * k1 + D::a32 * k2);
            k3 = G * tmp;
            tmp = y + step * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3);
            k4 = G * tmp;
            tmp = y + step * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4);
            k5 = G * tmp;
            tmp = y + step * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5);
            k6 = G * tmp;
            y_new = y + step * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
            k7 = G * y_new;

            const Eigen::VectorXcd err =
                step * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
            double norm = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
                norm += std::norm(err(i) / sc);
            }
            norm = std::sqrt(norm / static_cast<double>(y.size()));

            if (norm <= 1.0) {
                ++stats.accepted;
                t = last ? t_end : t + step;
                y.swap(y_new);
                k1.swap(k7);
            } else {
                ++stats.rejected;
            }
            const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
            // a truncated final step says nothing about the natural step size
            if (!(last && norm <= 1.0))
                h = step * factor;
            if (h < opt.min_step)
                throw StiffnessError("step size underflow at t = " + std::to_string(t) +
                                     " s; lower the photon cutoffs or prune atomic levels");
        }
        observe(target, t, y);
    }
    return stats;
}

inline std::vector<DensityOperator> time_evolve(const DensityOperator& rho0, const Liouvillian& L,
                                                const std::vector<double>& t_grid,
                                                const EvolutionOptions& opt = {}) {
    std::vector<DensityOperator> out;
    out.reserve(t_grid.size());
    evolve_observed(
        rho0, L, t_grid,
        [&](std::size_t, double, const Eigen::VectorXcd& v) { out.push_back(DensityOperator::from_vector(v, L.dim)); },
        opt);
    return out;
}

}  // namespace wgm::quantum
