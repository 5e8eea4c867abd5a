// quadrature.hpp - deterministic averaging over a truncated normal
// distribution of coupling strengths
//
// Nodes are Gauss-Legendre points on [g_min, g_max] (Golub-Welsch); weights
// are the Legendre weights times the normal density, renormalized to one.
// The nodes depend only on the interval and node count, so spectra computed
// on them can be cached and re-weighted for any (mean, sigma).

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wgmqed/errors.hpp"

namespace wgm::spectra {

struct GDistribution {
    double g_mean = 0.0;   // rad/s
    double g_sigma = 0.0;  // rad/s
    double g_min = 0.0;
    double g_max = 0.0;
    int n_nodes = 17;
};

inline void validate(const GDistribution& d) {
    if (!(d.g_min < d.g_max))
        throw DomainError("g distribution needs g_min < g_max");
    if (d.g_min < 0.0)
        throw DomainError("coupling strengths must be non-negative");
    if (d.g_sigma < 0.0)
        throw DomainError("g_sigma must be non-negative");
    if (d.n_nodes < 1)
        throw DomainError("at least one quadrature node is required");
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [lo, hi].
inline QuadratureRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1)
        throw DomainError("quadrature needs at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int k = 0; k < n; ++k) {
        rule.nodes.push_back(mid + half * es.eigenvalues()(k));
        const double v0 = es.eigenvectors()(0, k);
        rule.weights.push_back(2.0 * v0 * v0 * half);
    }
    return rule;
}

// Cached node set for a distribution's interval.
inline std::vector<double> quadrature_nodes(const GDistribution& d) {
    validate(d);
    if (d.n_nodes == 1)
        return {std::clamp(d.g_mean, d.g_min, d.g_max)};
    return gauss_legendre(d.n_nodes, d.g_min, d.g_max).nodes;
}

// Normalized weights of the truncated normal on the nodes of `quadrature_nodes`.
// sigma = 0 is a delta distribution and is represented by the single node g_mean;
// n_nodes = 1 places all weight on the distribution's mode.
inline QuadratureRule truncated_normal_rule(const GDistribution& d) {
    validate(d);
    if (d.g_sigma == 0.0) {
        if (d.g_mean < d.g_min || d.g_mean > d.g_max)
            throw DomainError("delta distribution lies outside the truncation interval");
        return {{d.g_mean}, {1.0}};
    }
    if (d.n_nodes == 1)
        return {{std::clamp(d.g_mean, d.g_min, d.g_max)}, {1.0}};

    QuadratureRule rule = gauss_legendre(d.n_nodes, d.g_min, d.g_max);
    double total = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = (rule.nodes[k] - d.g_mean) / d.g_sigma;
        rule.weights[k] *= std::exp(-0.5 * z * z);
        total += rule.weights[k];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw DomainError("distribution mass lies outside the truncation interval");
    for (auto& w : rule.weights)
        w /= total;
    return rule;
}

}  // namespace wgm::spectra
