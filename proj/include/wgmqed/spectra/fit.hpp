// fit.hpp - least-squares fit of the coupling-strength distribution
//
// Only the mean and width of the truncated normal are free. Spectra at the
// quadrature nodes are tabulated once for the data's detunings; every
// objective evaluation is then a reweighting of that table. Parameters are
// mapped into their bounds with p = lo + (hi - lo) (1 + tanh x) / 2 so the
// optimizer works unconstrained.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "wgmqed/errors.hpp"
#include "wgmqed/spectra/sweep.hpp"

namespace wgm::spectra {

struct FitOptions {
    double sigma_min = units::mhz_to_rad(0.5);
    double sigma_max = 0.0;  // 0: width of the truncation interval
    double tolerance = 1e-8;
    int max_evaluations = 4000;
    unsigned threads = 0;
};

struct FitResult {
    double g_mean_fit = 0.0;   // rad/s
    double g_sigma_fit = 0.0;  // rad/s
    double residual_norm = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (rad/s)^2
    std::vector<double> model_transmission;
    int start_index = -1;
    std::vector<std::string> warnings;
    std::vector<std::string> trace;
};

namespace detail {

struct BoxMap {
    double lo, hi;
    double to_param(double x) const { return lo + 0.5 * (hi - lo) * (1.0 + std::tanh(x)); }
    double to_free(double p) const {
        const double s = std::clamp(2.0 * (p - lo) / (hi - lo) - 1.0, -1.0 + 1e-12, 1.0 - 1e-12);
        return std::atanh(s);
    }
};

// Residuals in transmission units; parameters (x_mean, x_sigma) are free
// coordinates of the two box maps. Frequencies are handled in MHz.
struct DistributionResiduals {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const SpectrumTable* table;
    const std::vector<double>* data;
    GDistribution tmpl;  // MHz
    BoxMap mean_map, sigma_map;

    int inputs() const { return 2; }
    int values() const { return static_cast<int>(data->size()); }

    GDistribution distribution(double g_mean, double g_sigma) const {
        GDistribution d = tmpl;
        d.g_mean = g_mean;
        d.g_sigma = g_sigma;
        return d;
    }

    std::vector<double> model(double g_mean, double g_sigma) const {
        return table->average(truncated_normal_rule(distribution(g_mean, g_sigma)).weights);
    }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        const auto m = model(mean_map.to_param(x(0)), sigma_map.to_param(x(1)));
        for (std::size_t i = 0; i < m.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = m[i] - (*data)[i];
        return 0;
    }
};

inline double sum_squares(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline std::string lm_status_name(int status) {
    using S = Eigen::LevenbergMarquardtSpace::Status;
    switch (status) {
        case S::RelativeReductionTooSmall: return "relative reduction below tolerance";
        case S::RelativeErrorTooSmall: return "relative step below tolerance";
        case S::RelativeErrorAndReductionTooSmall: return "step and reduction below tolerance";
        case S::CosinusTooSmall: return "gradient orthogonal to residual";
        case S::TooManyFunctionEvaluation: return "evaluation budget exhausted";
        case S::FtolTooSmall: return "ftol too small";
        case S::XtolTooSmall: return "xtol too small";
        case S::GtolTooSmall: return "gtol too small";
        case S::ImproperInputParameters: return "improper input";
        default: return "status " + std::to_string(status);
    }
}

inline bool lm_converged(int status) {
    using S = Eigen::LevenbergMarquardtSpace::Status;
    return status == S::RelativeReductionTooSmall || status == S::RelativeErrorTooSmall ||
           status == S::RelativeErrorAndReductionTooSmall || status == S::CosinusTooSmall ||
           status == S::FtolTooSmall || status == S::XtolTooSmall || status == S::GtolTooSmall;
}

}  // namespace detail

// Fits (g_mean, g_sigma) given tabulated spectra on the template's quadrature
// nodes. `table` must have been computed for data.detunings.
inline FitResult fit_spectrum_table(const SpectrumResult& data, const SpectrumTable& table,
                                    const GDistribution& dist_template, const FitOptions& opt = {}) {
    validate(dist_template);
    if (dist_template.n_nodes < 2)
        throw DomainError("fitting a distribution width needs at least two quadrature nodes");
    if (data.detunings.size() != data.transmission.size())
        throw DomainError("spectrum detunings and transmissions differ in length");
    if (data.transmission.size() < 3)
        throw DomainError("at least three data points are needed to fit two parameters");
    if (table.detunings != data.detunings)
        throw ConsistencyError("tabulated spectra were computed for different detunings");
    if (table.nodes != quadrature_nodes(dist_template))
        throw ConsistencyError("tabulated nodes do not match the distribution template");

    const double to_mhz = 1.0 / units::mhz_to_rad(1.0);
    GDistribution tmpl = dist_template;
    tmpl.g_min *= to_mhz;
    tmpl.g_max *= to_mhz;
    const double range = tmpl.g_max - tmpl.g_min;
    const double sigma_lo = opt.sigma_min * to_mhz;
    const double sigma_hi = opt.sigma_max > 0.0 ? opt.sigma_max * to_mhz : range;
    if (!(sigma_lo > 0.0) || !(sigma_hi > sigma_lo))
        throw DomainError("fit width bounds must satisfy 0 < sigma_min < sigma_max");

    // Node positions are converted too so the rule sees the same units.
    SpectrumTable mhz_table = table;
    for (auto& g : mhz_table.nodes)
        g *= to_mhz;

    detail::DistributionResiduals f{&mhz_table, &data.transmission, tmpl, {tmpl.g_min, tmpl.g_max}, {sigma_lo, sigma_hi}};

    FitResult best;
    double best_ssr = std::numeric_limits<double>::infinity();
    const std::array<double, 3> mean_starts{0.25, 0.5, 0.75};
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd x(2);
        x << f.mean_map.to_free(tmpl.g_min + mean_starts[s] * range), f.sigma_map.to_free(0.25 * range);
        Eigen::NumericalDiff<detail::DistributionResiduals> nd(f);
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::DistributionResiduals>> lm(nd);
        lm.parameters.ftol = opt.tolerance;
        lm.parameters.xtol = opt.tolerance;
        lm.parameters.maxfev = opt.max_evaluations;
        const int status = lm.minimize(x);

        const double gm = f.mean_map.to_param(x(0));
        const double gs = f.sigma_map.to_param(x(1));
        const auto model = f.model(gm, gs);
        const double ssr = detail::sum_squares(model, data.transmission);
        best.trace.push_back("start " + std::to_string(s) + ": " + detail::lm_status_name(status) + ", g_mean " +
                             std::to_string(gm) + " MHz, g_sigma " + std::to_string(gs) + " MHz, ssr " +
                             std::to_string(ssr) + ", evaluations " + std::to_string(lm.nfev));
        // strict comparison keeps the earliest start on ties
        if (detail::lm_converged(status) && ssr < best_ssr) {
            best_ssr = ssr;
            best.start_index = s;
            best.g_mean_fit = gm;
            best.g_sigma_fit = gs;
            best.model_transmission = model;
        }
    }
    if (best.start_index < 0) {
        std::string msg = "fit did not converge from any start:";
        for (const auto& t : best.trace)
            msg += "\n  " + t;
        throw FitError(msg);
    }
    best.residual_norm = std::sqrt(best_ssr);

    // Covariance s^2 (J^T J)^-1 with J taken in the physical parameters.
    const std::size_t m = data.transmission.size();
    Eigen::MatrixXd J(m, 2);
    const std::array<double, 2> p{best.g_mean_fit, best.g_sigma_fit};
    for (int k = 0; k < 2; ++k) {
        const double lo = k == 0 ? tmpl.g_min : sigma_lo;
        const double hi = k == 0 ? tmpl.g_max : sigma_hi;
        const double h = 1e-4 * (hi - lo);
        const double a = std::max(lo, p[k] - h), b = std::min(hi, p[k] + h);
        auto pa = p, pb = p;
        pa[k] = a;
        pb[k] = b;
        const auto ma = f.model(pa[0], pa[1]);
        const auto mb = f.model(pb[0], pb[1]);
        for (std::size_t i = 0; i < m; ++i)
            J(static_cast<Eigen::Index>(i), k) = (mb[i] - ma[i]) / (b - a);
    }
    const double dof = static_cast<double>(m) - 2.0;
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(JtJ);
    const double mhz2 = units::mhz_to_rad(1.0) * units::mhz_to_rad(1.0);
    if (lu.isInvertible())
        best.covariance = (best_ssr / dof) * lu.inverse() * mhz2;
    else
        best.warnings.push_back("Jacobian is rank deficient; covariance not available");

    const double edge = 1e-3;
    if (best.g_mean_fit - tmpl.g_min < edge * range || tmpl.g_max - best.g_mean_fit < edge * range)
        best.warnings.push_back("g_mean pinned at a truncation bound");
    if (best.g_sigma_fit - sigma_lo < edge * (sigma_hi - sigma_lo) ||
        sigma_hi - best.g_sigma_fit < edge * (sigma_hi - sigma_lo))
        best.warnings.push_back("g_sigma pinned at a fit bound");

    best.g_mean_fit = units::mhz_to_rad(best.g_mean_fit);
    best.g_sigma_fit = units::mhz_to_rad(best.g_sigma_fit);
    return best;
}

inline SpectrumTable tabulate_for_fit(const ModelConfig& cfg, Geometry geometry, const std::vector<double>& detunings,
                                      const GDistribution& dist_template, unsigned threads = 0) {
    return tabulate_spectra(cfg, geometry, detunings, quadrature_nodes(dist_template), threads);
}

inline FitResult fit_spectrum(const SpectrumResult& data, const ModelConfig& cfg, Geometry geometry,
                              const GDistribution& dist_template, const FitOptions& opt = {}) {
    GDistribution tmpl = dist_template;
    tmpl.g_sigma = std::max(tmpl.g_sigma, opt.sigma_min);  // the template's sigma only selects the rule type
    return fit_spectrum_table(data, tabulate_for_fit(cfg, geometry, data.detunings, tmpl, opt.threads), tmpl, opt);
}

// Adds independent Gaussian noise of standard deviation `sigma` (absolute
// transmission units) to a spectrum.
inline SpectrumResult add_noise(SpectrumResult s, double sigma, std::uint64_t seed) {
    if (sigma < 0.0)
        throw DomainError("noise level must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& t : s.transmission)
        t += noise(rng);
    return s;
}

}  // namespace wgm::spectra
