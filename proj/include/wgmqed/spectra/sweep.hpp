// sweep.hpp - transmission spectra versus resonator-probe detuning

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "wgmqed/errors.hpp"
#include "wgmqed/spectra/model.hpp"
#include "wgmqed/spectra/quadrature.hpp"

namespace wgm::spectra {

struct SpectrumResult {
    std::vector<double> detunings;  // delta_rs, rad/s
    std::vector<double> transmission;
    std::string geometry;
    std::vector<std::string> warnings;
};

namespace detail {

// Runs body(worker_state, index) for every index, splitting the range into
// contiguous blocks. Each worker owns the state returned by make_state().
template <typename MakeState, typename Body>
void parallel_for(std::size_t n, unsigned threads, MakeState make_state, Body body) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        auto state = make_state();
        for (std::size_t i = 0; i < n; ++i)
            body(state, i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        const std::size_t block = (n + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    auto state = make_state();
                    for (std::size_t i = w * block; i < std::min(n, (w + 1) * block); ++i)
                        body(state, i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline std::string mhz_label(double delta) {
    return std::to_string(units::rad_to_mhz(delta)) + " MHz";
}

// Re-throws a solver failure with the offending detuning attached, keeping its type.
template <typename F>
auto at_detuning(double delta, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const NonUniqueSteadyStateError& e) {
        throw NonUniqueSteadyStateError(std::string(e.what()) + " (detuning " + mhz_label(delta) + ")");
    } catch (const StiffnessError& e) {
        throw StiffnessError(std::string(e.what()) + " (detuning " + mhz_label(delta) + ")");
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string(e.what()) + " (detuning " + mhz_label(delta) + ")");
    }
}

}  // namespace detail

// Transversal ring-resonator picture: two identically polarized standing
// waves, the atom at the node of one and the antinode (coupling sqrt(2) g) of
// the other. The transmitted amplitude is the mean of the two channels.
inline SpectrumResult legacy_standing_wave_spectrum(const ModelConfig& cfg, const std::vector<double>& detunings,
                                                    double g_fixed) {
    SpectrumResult r{detunings, {}, to_string(Geometry::legacy), {}};
    for (double d : detunings) {
        const cplx coupled =
            two_level_amplitude(d, std::sqrt(2.0) * g_fixed, cfg.kappa0, cfg.kappa_ext, cfg.atom.gamma, cfg.delta_ca);
        const cplx uncoupled = two_level_amplitude(d, 0.0, cfg.kappa0, cfg.kappa_ext, cfg.atom.gamma, cfg.delta_ca);
        r.transmission.push_back(std::norm(0.5 * (coupled + uncoupled)));
    }
    return r;
}

// cw spectrum at fixed coupling g_fixed (rad/s). `threads` = 0 uses all cores.
inline SpectrumResult sweep_spectrum(const ModelConfig& cfg, Geometry geometry, const std::vector<double>& detunings,
                                     double g_fixed, unsigned threads = 0) {
    if (geometry == Geometry::legacy)
        return legacy_standing_wave_spectrum(cfg, detunings, g_fixed);
    if (g_fixed < 0.0)
        throw DomainError("coupling strength must be non-negative");
    const Geometry model_geometry = geometry == Geometry::empty ? Geometry::co_TM : geometry;
    const double g = geometry == Geometry::empty ? 0.0 : g_fixed;

    SpectrumResult r{detunings, std::vector<double>(detunings.size()), to_string(geometry), {}};
    detail::parallel_for(
        detunings.size(), threads, [&] { return SpectrumModel(model_geometry, cfg); },
        [&](SpectrumModel& model, std::size_t i) {
            r.transmission[i] = detail::at_detuning(detunings[i], [&] { return model.steady_transmission(detunings[i], g); });
        });
    return r;
}

// Transmission T(delta_i; g_k) on a fixed grid of detunings and couplings.
// Averages over any distribution whose quadrature uses the same nodes are
// weighted sums of the rows, which makes fitting cheap.
struct SpectrumTable {
    std::vector<double> detunings;
    std::vector<double> nodes;
    std::vector<std::vector<double>> transmission;  // [node][detuning]
    std::string geometry;

    std::vector<double> average(const std::vector<double>& weights) const {
        if (weights.size() != nodes.size())
            throw ConsistencyError("weight count does not match the tabulated nodes");
        std::vector<double> out(detunings.size(), 0.0);
        for (std::size_t k = 0; k < nodes.size(); ++k)
            for (std::size_t i = 0; i < detunings.size(); ++i)
                out[i] += weights[k] * transmission[k][i];
        return out;
    }
};

inline SpectrumTable tabulate_spectra(const ModelConfig& cfg, Geometry geometry, const std::vector<double>& detunings,
                                      const std::vector<double>& nodes, unsigned threads = 0) {
    SpectrumTable table{detunings, nodes, {}, to_string(geometry)};
    for (double g : nodes)
        table.transmission.push_back(sweep_spectrum(cfg, geometry, detunings, g, threads).transmission);
    return table;
}

inline SpectrumResult averaged_spectrum(const ModelConfig& cfg, Geometry geometry,
                                        const std::vector<double>& detunings, const GDistribution& dist,
                                        unsigned threads = 0) {
    const QuadratureRule rule = truncated_normal_rule(dist);
    const SpectrumTable table = tabulate_spectra(cfg, geometry, detunings, rule.nodes, threads);
    return {detunings, table.average(rule.weights), to_string(geometry), {}};
}

struct PulseWindow {
    double t_start = std::numeric_limits<double>::quiet_NaN();  // NaN: 5 / kappa_tot
    double t_len = 100e-9;
    int samples = 201;
};

inline double default_window_start(const ModelConfig& cfg) { return 5.0 / cfg.kappa_tot(); }

// Reduced atomic state after the detection phase: steady state of the
// co-propagating resonant detection light, with both modes reset to vacuum.
inline quantum::DensityOperator detection_prepared_state(SpectrumModel& model, double g0) {
    const auto& space = model.space();
    if (g0 == 0.0)  // inert single-level space, resonator in vacuum
        return quantum::DensityOperator::pure(model.space_for(model.params(0.0, 0.0)).dim(), 0);
    const Geometry co = is_tm(model.setup().geometry) ? Geometry::co_TM : Geometry::co_TE;
    SpectrumModel detection(co, model.config());
    auto p = detection.params(0.0, g0);
    p.alpha_in = std::sqrt(model.config().photon_flux);
    const auto rho = detection.steady_state(p);
    return quantum::with_vacuum(space, quantum::atomic_state(detection.space(), rho));
}

// Transmission of a probe switched on at t = 0, averaged coherently over
// [t_start, t_start + t_len]: T = |1 - i sqrt(2 kappa_ext) <d>_avg / alpha_in|^2.
inline double pulsed_transmission(SpectrumModel& model, const quantum::DensityOperator& rho0, double delta, double g0,
                                  const PulseWindow& window) {
    const auto& cfg = model.config();
    const double t_start = std::isnan(window.t_start) ? default_window_start(cfg) : window.t_start;
    if (window.t_len <= 0.0 || window.samples < 2)
        throw DomainError("pulse window needs positive length and at least two samples");
    const auto p = model.params(delta, g0);
    const auto L = model.liouvillian(p);
    if (rho0.dim() != L.dim)
        throw ConsistencyError("prepared state does not live in the probe geometry's space");
    const auto& ops = model.operators_for(p);
    const auto& d = p.drive_mode == quantum::DrivenMode::a ? ops.a : ops.b;

    std::vector<double> grid{0.0};
    for (int k = 0; k < window.samples; ++k) {
        const double t = t_start + window.t_len * k / (window.samples - 1);
        if (t > grid.back())
            grid.push_back(t);
    }
    const std::size_t first = grid.size() - static_cast<std::size_t>(window.samples);

    std::vector<cplx> field(grid.size());
    quantum::evolve_observed(rho0, L, grid, [&](std::size_t k, double, const Eigen::VectorXcd& v) {
        const auto rho = Eigen::Map<const quantum::DenseMatrix>(v.data(), L.dim, L.dim);
        field[k] = (d * rho).trace();
    });

    cplx mean = 0.0;  // trapezoid rule on the uniform window grid
    for (std::size_t k = first; k < grid.size(); ++k) {
        const double w = (k == first || k + 1 == grid.size()) ? 0.5 : 1.0;
        mean += w * field[k];
    }
    mean /= static_cast<double>(window.samples - 1);
    const cplx out = p.alpha_in - cplx(0.0, 1.0) * std::sqrt(2.0 * p.kappa_ext) * mean;
    return std::norm(out / p.alpha_in);
}

inline SpectrumResult pulsed_probe_spectrum(const ModelConfig& cfg, Geometry geometry,
                                            const std::vector<double>& detunings, const PulseWindow& window,
                                            double g0, unsigned threads = 0) {
    if (geometry == Geometry::legacy || geometry == Geometry::empty)
        throw DomainError("pulsed probing needs an atom geometry");
    SpectrumResult r{detunings, std::vector<double>(detunings.size()), to_string(geometry), {}};
    const double t_start = std::isnan(window.t_start) ? default_window_start(cfg) : window.t_start;
    if (t_start < default_window_start(cfg) * (1.0 - 1e-12))
        r.warnings.push_back("window starts before the resonator field has relaxed (5/kappa_tot); "
                             "transients contaminate the spectrum");

    SpectrumModel prep_model(geometry, cfg);
    const auto rho0 = detection_prepared_state(prep_model, g0);
    detail::parallel_for(
        detunings.size(), threads, [&] { return SpectrumModel(geometry, cfg); },
        [&](SpectrumModel& model, std::size_t i) {
            r.transmission[i] = detail::at_detuning(
                detunings[i], [&] { return pulsed_transmission(model, rho0, detunings[i], g0, window); });
        });
    return r;
}

inline SpectrumResult averaged_pulsed_spectrum(const ModelConfig& cfg, Geometry geometry,
                                               const std::vector<double>& detunings, const PulseWindow& window,
                                               const GDistribution& dist, unsigned threads = 0) {
    const QuadratureRule rule = truncated_normal_rule(dist);
    SpectrumResult r{detunings, std::vector<double>(detunings.size(), 0.0), to_string(geometry), {}};
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const auto s = pulsed_probe_spectrum(cfg, geometry, detunings, window, rule.nodes[k], threads);
        for (std::size_t i = 0; i < detunings.size(); ++i)
            r.transmission[i] += rule.weights[k] * s.transmission[i];
        if (r.warnings.empty())
            r.warnings = s.warnings;
    }
    return r;
}

}  // namespace wgm::spectra
