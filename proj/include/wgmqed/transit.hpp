// transit.hpp - atom transits through the evanescent field and the
// real-time trigger / survival-check protocol
//
// The transmission during a transit is quasi-static: T(g(t)) is the
// on-resonance steady state at the instantaneous coupling, since transits
// last microseconds and the resonator relaxes in ~1/kappa_tot ~ 16 ns.
// Detector dead time and afterpulsing are ignored.
//
// Random numbers come from std::mt19937_64 with explicit conversions to
// uniform doubles, so a seed replays bit-exactly on any standard library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wgmqed/errors.hpp"
#include "wgmqed/spectra/io.hpp"
#include "wgmqed/spectra/model.hpp"
#include "wgmqed/units.hpp"

namespace wgm::transit {

namespace detail {

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double exponential(std::mt19937_64& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

inline double standard_normal(std::mt19937_64& rng) {
    // Box-Muller, one variate per call
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
}

// Decorrelates consecutive integer seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace detail

struct TransitTrajectory {
    double dt = 0.0;  // s
    std::vector<double> g_of_t;  // rad/s on t_k = k dt

    double duration() const { return g_of_t.empty() ? 0.0 : dt * static_cast<double>(g_of_t.size() - 1); }

    // Linear interpolation, zero outside the sampled interval.
    double g_at(double t) const {
        if (g_of_t.empty() || t < 0.0 || t > duration())
            return 0.0;
        const double x = t / dt;
        const auto k = std::min(static_cast<std::size_t>(x), g_of_t.size() - 1);
        if (k + 1 >= g_of_t.size())
            return g_of_t.back();
        const double f = x - static_cast<double>(k);
        return (1.0 - f) * g_of_t[k] + f * g_of_t[k + 1];
    }
};

// Gaussian transit g(t) = g_peak exp(-(t - duration/2)^2 / (2 sigma_t^2)).
// With peak_jitter > 0 the peak is scaled by max(0, 1 + peak_jitter * N(0,1))
// drawn from `seed`; otherwise the seed is unused.
inline TransitTrajectory sample_trajectory(double g_peak, double sigma_t, double duration, double dt,
                                           std::uint64_t seed, double peak_jitter = 0.0) {
    if (g_peak < 0.0 || !(sigma_t > 0.0) || !(duration > 0.0) || !(dt > 0.0) || peak_jitter < 0.0)
        throw DomainError("trajectory parameters must be positive (g_peak, jitter non-negative)");
    if (dt > sigma_t / 4.0)
        throw DomainError("time step " + std::to_string(dt) + " s does not resolve the transit (needs dt <= sigma_t/4)");
    double peak = g_peak;
    if (peak_jitter > 0.0) {
        std::mt19937_64 rng(seed);
        peak *= std::max(0.0, 1.0 + peak_jitter * detail::standard_normal(rng));
    }
    TransitTrajectory tr;
    tr.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    const double center = 0.5 * static_cast<double>(n - 1) * dt;
    tr.g_of_t.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double z = (static_cast<double>(k) * dt - center) / sigma_t;
        tr.g_of_t[k] = peak * std::exp(-0.5 * z * z);
    }
    return tr;
}

struct TriggerConfig {
    double dt1 = 1.2e-6;  // trigger window, s
    int eta1 = 6;         // trigger threshold (counts)
    double dt2 = 1.0e-6;  // survival window, s
    int eta2 = 2;
    double detector_efficiency = 0.5;
    double probe_flux = spectra::experimental_photon_flux;  // photons/s
    double spectroscopy_gap = 0.5e-6;  // trigger to survival window, s
    double baseline_floor = 0.0;       // minimum fibre transmission (residual of a real resonator)

    static TriggerConfig for_te() {
        TriggerConfig c;
        c.eta1 = 4;
        return c;
    }
};

inline void validate(const TriggerConfig& c) {
    if (!(c.dt1 > 0.0) || !(c.dt2 > 0.0))
        throw DomainError("trigger windows must be positive");
    if (c.eta1 < 1 || c.eta2 < 1)
        throw DomainError("count thresholds must be at least 1");
    if (!(c.detector_efficiency > 0.0) || c.detector_efficiency > 1.0)
        throw DomainError("detector efficiency must lie in (0, 1]");
    if (c.probe_flux < 0.0 || c.spectroscopy_gap < 0.0)
        throw DomainError("probe flux and spectroscopy gap must be non-negative");
    if (c.baseline_floor < 0.0 || c.baseline_floor > 1.0)
        throw DomainError("baseline transmission floor must lie in [0, 1]");
}

// On-resonance transmission T(g) tabulated on a uniform g grid.
struct TransmissionTable {
    std::vector<double> g;  // rad/s, uniform, g.front() = 0
    std::vector<double> T;

    double operator()(double gv) const {
        if (g.size() < 2)
            throw DomainError("transmission table needs at least two points");
        if (gv <= g.front())
            return T.front();
        if (gv >= g.back())
            return T.back();
        const double step = g[1] - g[0];
        const auto k = std::min(static_cast<std::size_t>((gv - g.front()) / step), g.size() - 2);
        const double f = (gv - g[k]) / step;
        return (1.0 - f) * T[k] + f * T[k + 1];
    }

    double max() const { return *std::max_element(T.begin(), T.end()); }
};

inline TransmissionTable on_resonance_table(const spectra::ModelConfig& cfg, spectra::Geometry geometry, double g_max,
                                            int points = 61) {
    if (spectra::is_counter(geometry) || geometry == spectra::Geometry::legacy)
        throw DomainError("transit detection uses a co-propagating geometry");
    if (points < 2 || !(g_max > 0.0))
        throw DomainError("transmission table needs g_max > 0 and at least two points");
    spectra::SpectrumModel model(geometry, cfg);
    TransmissionTable t;
    for (int k = 0; k < points; ++k) {
        const double g = g_max * k / (points - 1);
        t.g.push_back(g);
        t.T.push_back(model.steady_transmission(0.0, g));
    }
    return t;
}

// Constant transmission, for noise-only streams.
inline TransmissionTable constant_table(double T) { return {{0.0, 1.0}, {T, T}}; }

// Detection timestamps (s) of an inhomogeneous Poisson process with rate
// flux * max(T(g(t)), floor) * efficiency, generated by thinning.
inline std::vector<double> photon_count_stream(const TransitTrajectory& traj, const TransmissionTable& table,
                                               const TriggerConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    auto transmission = [&](double t) { return std::max(table(traj.g_at(t)), cfg.baseline_floor); };
    const double scale = cfg.probe_flux * cfg.detector_efficiency;
    const double rate_max = scale * std::max(table.max(), cfg.baseline_floor);
    std::vector<double> stamps;
    if (!(rate_max > 0.0))
        return stamps;
    std::mt19937_64 rng(seed);
    const double end = traj.duration();
    double t = 0.0;
    while (true) {
        t += detail::exponential(rng, rate_max);
        if (t > end)
            break;
        if (detail::uniform01(rng) * rate_max < scale * transmission(t))
            stamps.push_back(t);
    }
    return stamps;
}

struct ProtocolOutcome {
    bool triggered = false;
    double trigger_time = std::numeric_limits<double>::quiet_NaN();  // s
    bool survived = false;
    std::vector<double> photon_record;
};

// Sliding-window trigger: the first photon that completes eta1 counts within
// dt1 (the window (t - dt1, t]) fires. The survival check counts photons in
// [t_trig + gap, t_trig + gap + dt2).
inline ProtocolOutcome run_trigger_protocol(const std::vector<double>& timestamps, const TriggerConfig& cfg) {
    validate(cfg);
    if (!std::is_sorted(timestamps.begin(), timestamps.end()))
        throw DomainError("photon timestamps must be sorted");
    ProtocolOutcome out;
    out.photon_record = timestamps;
    std::size_t first = 0;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        while (timestamps[first] <= timestamps[i] - cfg.dt1)
            ++first;
        if (static_cast<int>(i - first + 1) >= cfg.eta1) {
            out.triggered = true;
            out.trigger_time = timestamps[i];
            break;
        }
    }
    if (out.triggered) {
        const double a = out.trigger_time + cfg.spectroscopy_gap;
        const double b = a + cfg.dt2;
        const auto lo = std::lower_bound(timestamps.begin(), timestamps.end(), a);
        const auto hi = std::lower_bound(timestamps.begin(), timestamps.end(), b);
        out.survived = std::distance(lo, hi) >= cfg.eta2;
    }
    return out;
}

struct TransitSpec {
    double g_peak = units::mhz_to_rad(30.0);
    double sigma_t = 2e-6;
    double duration = 12e-6;
    double dt = 10e-9;
    double peak_jitter = 0.0;
};

struct EnsembleSummary {
    double g_peak = 0.0;
    std::size_t runs = 0;
    std::size_t triggered = 0;
    std::size_t survived = 0;

    double trigger_rate() const { return runs ? static_cast<double>(triggered) / runs : 0.0; }
    double trigger_rate_sigma() const {
        const double p = trigger_rate();
        return runs ? std::sqrt(p * (1.0 - p) / runs) : 0.0;
    }
    double survival_rate() const { return triggered ? static_cast<double>(survived) / triggered : 0.0; }
};

struct EnsembleResult {
    std::vector<ProtocolOutcome> outcomes;
    std::vector<std::uint64_t> seeds;
    EnsembleSummary summary;
};

// Run k uses seed splitmix64(base_seed + k) for its trajectory jitter and the
// next value for its photon stream.
inline EnsembleResult run_ensemble(const TransitSpec& spec, const TransmissionTable& table, const TriggerConfig& cfg,
                                   std::size_t runs, std::uint64_t base_seed, bool keep_records = true) {
    EnsembleResult r;
    r.summary.g_peak = spec.g_peak;
    r.summary.runs = runs;
    for (std::size_t k = 0; k < runs; ++k) {
        const std::uint64_t seed = detail::splitmix64(base_seed + k);
        const auto traj = sample_trajectory(spec.g_peak, spec.sigma_t, spec.duration, spec.dt, seed, spec.peak_jitter);
        auto outcome = run_trigger_protocol(photon_count_stream(traj, table, cfg, detail::splitmix64(seed)), cfg);
        r.summary.triggered += outcome.triggered;
        r.summary.survived += outcome.survived;
        if (!keep_records)
            outcome.photon_record.clear();
        r.outcomes.push_back(std::move(outcome));
        r.seeds.push_back(seed);
    }
    return r;
}

// One JSON object per transit, newline separated.
inline std::string outcomes_jsonl(const EnsembleResult& r, const std::string& config_hash) {
    std::ostringstream out;
    for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
        const auto& o = r.outcomes[k];
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash;
        j["index"] = k;
        j["seed"] = r.seeds[k];
        j["triggered"] = o.triggered;
        j["trigger_time_us"] = o.triggered ? nlohmann::ordered_json(o.trigger_time * 1e6) : nlohmann::ordered_json();
        j["survived"] = o.survived;
        std::vector<double> us;
        for (double t : o.photon_record)
            us.push_back(t * 1e6);
        j["photon_times_us"] = us;
        out << j.dump() << "\n";
    }
    return out.str();
}

inline std::string summary_csv(const std::vector<EnsembleSummary>& rows, const std::string& config_hash) {
    using spectra::format_number;
    std::ostringstream out;
    out << "# config_hash: " << config_hash << "\n";
    out << "g_peak_MHz,runs,triggered,trigger_rate,trigger_rate_sigma,survived,survival_rate\n";
    for (const auto& s : rows)
        out << format_number(units::rad_to_mhz(s.g_peak)) << "," << s.runs << "," << s.triggered << ","
            << format_number(s.trigger_rate()) << "," << format_number(s.trigger_rate_sigma()) << "," << s.survived
            << "," << format_number(s.survival_rate()) << "\n";
    return out.str();
}

}  // namespace wgm::transit
