// run.hpp - scenario execution and artifact writing for the command-line tool

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wgmqed/atom.hpp"
#include "wgmqed/cli/config.hpp"
#include "wgmqed/fields.hpp"
#include "wgmqed/spectra.hpp"
#include "wgmqed/transit.hpp"

namespace wgm::cli {

inline constexpr const char* output_dir_env = "WGMQED_OUTPUT_DIR";

inline std::filesystem::path output_directory(const std::string& configured) {
    if (const char* env = std::getenv(output_dir_env); env && *env)
        return env;
    return configured;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content) || !out.flush())
        throw Error("cannot write '" + path.string() + "'");
}

struct RunReport {
    std::string summary;
    std::vector<std::filesystem::path> files;
};

namespace detail {

using spectra::format_number;

inline std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

inline Json envelope(const RunConfig& rc) {
    Json j;
    j["config_hash"] = rc.hash;
    j["scenario"] = rc.scenario;
    j["config"] = rc.resolved;
    return j;
}

class Writer {
  public:
    Writer(const RunConfig& rc, RunReport& report)
        : dir_(output_directory(rc.output_directory)), prefix_(rc.output_prefix), report_(report) {}

    void operator()(const std::string& suffix, const std::string& content) {
        const auto path = dir_ / (prefix_ + suffix);
        write_text(path, content);
        report_.files.push_back(path);
    }

  private:
    std::filesystem::path dir_;
    std::string prefix_;
    RunReport& report_;
};

inline std::string hashed_csv(const std::string& hash, const std::string& header, const std::string& rows) {
    return "# config_hash: " + hash + "\n" + header + "\n" + rows;
}

// Local minima of a sampled curve, as detunings in MHz.
inline std::vector<double> local_minima(const spectra::SpectrumResult& s) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < s.transmission.size(); ++i)
        if (s.transmission[i] < s.transmission[i - 1] && s.transmission[i] <= s.transmission[i + 1])
            out.push_back(units::rad_to_mhz(s.detunings[i]));
    return out;
}

inline std::string minima_text(const spectra::SpectrumResult& s) {
    std::string t;
    for (double m : local_minima(s))
        t += (t.empty() ? "" : ", ") + fmt(m, 1);
    return "minima at [" + t + "] MHz";
}

inline void write_spectrum(Writer& write, const RunConfig& rc, const spectra::SpectrumResult& s,
                           const std::vector<double>* model = nullptr, Json extra = Json::object()) {
    write(".csv", spectra::spectrum_csv(s, rc.hash, model));
    Json j = envelope(rc);
    j["spectrum"] = spectra::to_json(s);
    if (model)
        j["spectrum"]["model_transmission"] = *model;
    for (auto it = extra.begin(); it != extra.end(); ++it)
        j[it.key()] = it.value();
    write(".json", j.dump(2) + "\n");
}

inline RunReport run_fields(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto& f = rc.fields;

    std::string rows;
    for (int k = 0; k < f.index_points; ++k) {
        const double n = f.index_points == 1 ? f.index_min
                                             : f.index_min + (f.index_max - f.index_min) * k / (f.index_points - 1);
        const double r = fields::longitudinal_ratio(fields::RefractiveRatio::from_indices(n, 1.0));
        const auto u = fields::mode_couplings(fields::ModePolarization::tm(r, fields::Sense::plus));
        const auto c = fields::azimuthal_intensity_contrast(r, rc.model.azimuth_phase);
        rows += format_number(n) + "," + format_number(r) + "," + format_number(std::norm(u[2])) + "," +
                format_number(std::norm(u[1])) + "," + format_number(std::norm(u[0])) + "," +
                format_number(c.contrast) + "," + format_number(c.min_over_max) + "\n";
    }
    write("_overlap.csv", hashed_csv(rc.hash,
                                     "refractive_index,longitudinal_ratio,overlap_sigma_plus,overlap_pi,"
                                     "overlap_sigma_minus,intensity_contrast,intensity_min_over_max",
                                     rows));

    const auto ratio = fields::RefractiveRatio::from_indices(rc.model.refractive_index, 1.0);
    const double theta_c = fields::critical_angle(ratio);
    rows.clear();
    for (int k = 0; k < f.angle_points; ++k) {
        const double theta = theta_c + (std::numbers::pi / 2 - theta_c) * k / (f.angle_points - 1);
        const auto e = fields::evanescent_components(theta, ratio);
        rows += format_number(theta * 180.0 / std::numbers::pi) + "," + format_number(e.e_r) + "," +
                format_number(e.e_phi) + "," + format_number(e.e_r > 0.0 ? e.e_phi / e.e_r : 0.0) + "\n";
    }
    write("_evanescent.csv", hashed_csv(rc.hash, "theta_deg,E_r,E_phi,E_phi_over_E_r", rows));

    rows.clear();
    const double r = fields::longitudinal_ratio(ratio);
    const auto profile = fields::azimuthal_intensity_profile(r, rc.model.azimuth_phase, f.azimuth_samples);
    for (int k = 0; k < f.azimuth_samples; ++k)
        rows += format_number(360.0 * k / f.azimuth_samples) + "," + format_number(profile[k]) + "\n";
    write("_azimuth.csv", hashed_csv(rc.hash, "phi_deg,intensity", rows));

    rows.clear();
    fields::CouplingProfile cp;
    cp.g_ref = f.g_ref;
    for (int k = 0; k < f.distance_points; ++k) {
        const double d = f.distance_points == 1
                             ? f.distance_min
                             : f.distance_min + (f.distance_max - f.distance_min) * k / (f.distance_points - 1);
        rows += format_number(d / units::nanometre) + "," +
                format_number(units::rad_to_mhz(fields::coupling_vs_distance(d, cp))) + "\n";
    }
    write("_distance.csv", hashed_csv(rc.hash, "distance_nm,g_MHz", rows));

    const auto u = fields::mode_couplings(fields::ModePolarization::tm(r, fields::Sense::plus));
    report.summary = "fields: n = " + fmt(rc.model.refractive_index, 3) + ", TM+ overlaps sigma+/pi/sigma- = " +
                     fmt(std::norm(u[2]), 4) + "/" + fmt(std::norm(u[1]), 4) + "/" + fmt(std::norm(u[0]), 4);
    return report;
}

inline spectra::SpectrumResult maybe_noisy(const RunConfig& rc, spectra::SpectrumResult s) {
    return rc.noise_sigma > 0.0 ? spectra::add_noise(std::move(s), rc.noise_sigma, rc.seed) : s;
}

inline RunReport run_spectrum(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto s = maybe_noisy(rc, spectra::sweep_spectrum(rc.model, rc.geometry, rc.detunings, rc.g_fixed, rc.threads));
    write_spectrum(write, rc, s);
    report.summary = "spectrum " + s.geometry + ", g = " + fmt(units::rad_to_mhz(rc.g_fixed), 2) + " MHz: " +
                     minima_text(s);
    return report;
}

inline RunReport run_averaged(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto s =
        maybe_noisy(rc, spectra::averaged_spectrum(rc.model, rc.geometry, rc.detunings, rc.distribution, rc.threads));
    write_spectrum(write, rc, s);
    report.summary = "averaged " + s.geometry + ": " + minima_text(s);
    return report;
}

inline RunReport run_fit(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    spectra::SpectrumResult data;
    std::string origin;
    if (!rc.fit_data_csv.empty()) {
        std::filesystem::path p = rc.fit_data_csv;
        if (p.is_relative())
            p = std::filesystem::path(rc.config_dir) / p;
        data = spectra::read_spectrum_csv(p.string());
        origin = rc.fit_data_csv;
    } else {
        data = spectra::add_noise(
            spectra::averaged_spectrum(rc.model, rc.geometry, rc.detunings, rc.distribution, rc.threads),
            rc.noise_sigma, rc.seed);
        origin = "synthetic";
    }
    data.geometry = spectra::to_string(rc.geometry);
    const auto fit = spectra::fit_spectrum(data, rc.model, rc.geometry, rc.distribution, rc.fit);
    Json extra;
    extra["data_source"] = origin;
    extra["fit"] = spectra::to_json(fit);
    write_spectrum(write, rc, data, &fit.model_transmission, extra);
    report.summary = "fit " + data.geometry + " (" + origin + "): g_mean = " + fmt(units::rad_to_mhz(fit.g_mean_fit), 2) +
                     " MHz, g_sigma = " + fmt(units::rad_to_mhz(fit.g_sigma_fit), 2) +
                     " MHz, residual norm = " + format_number(fit.residual_norm);
    for (const auto& w : fit.warnings)
        report.summary += "; warning: " + w;
    return report;
}

inline RunReport run_legacy(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto legacy = spectra::legacy_standing_wave_spectrum(rc.model, rc.detunings, rc.g_fixed);
    auto tm_cfg = rc.model;
    const auto model = spectra::sweep_spectrum(tm_cfg, spectra::Geometry::co_TM, rc.detunings, rc.g_fixed, rc.threads);
    write_spectrum(write, rc, legacy, &model.transmission);

    std::string rows;
    double sup = 0.0;
    const double k = rc.model.kappa_tot();
    for (int i = 0; i < rc.legacy_g_points; ++i) {
        // logarithmic grid from 1e-3 kappa_tot, plus g = 0
        const double x = i == 0 ? 0.0
                                : rc.legacy_g_over_kappa_max *
                                      std::pow(1e-3 / rc.legacy_g_over_kappa_max,
                                               1.0 - static_cast<double>(i - 1) / (rc.legacy_g_points - 2));
        const double T0 = spectra::legacy_standing_wave_spectrum(rc.model, {0.0}, x * k).transmission[0];
        sup = std::max(sup, T0);
        rows += format_number(x) + "," + format_number(T0) + "\n";
    }
    write("_on_resonance.csv", hashed_csv(rc.hash, "g_over_kappa_tot,legacy_transmission_0", rows));

    const auto centre = spectra::sweep_spectrum(tm_cfg, spectra::Geometry::co_TM, {0.0}, rc.g_fixed, 1);
    report.summary = "legacy: sup_g T(0) = " + fmt(sup, 6) + " (bound 0.25); at g = " +
                     fmt(units::rad_to_mhz(rc.g_fixed), 2) + " MHz legacy T(0) = " +
                     fmt(spectra::legacy_standing_wave_spectrum(rc.model, {0.0}, rc.g_fixed).transmission[0], 4) +
                     ", co_TM T(0) = " + fmt(centre.transmission[0], 4);
    return report;
}

inline RunReport run_pulsed(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto s = rc.pulse_average ? spectra::averaged_pulsed_spectrum(rc.model, rc.geometry, rc.detunings, rc.window,
                                                                        rc.distribution, rc.threads)
                                    : spectra::pulsed_probe_spectrum(rc.model, rc.geometry, rc.detunings, rc.window,
                                                                     rc.g_fixed, rc.threads);
    std::vector<double> empty;
    double dev = 0.0;
    for (std::size_t i = 0; i < s.detunings.size(); ++i) {
        empty.push_back(spectra::empty_cavity_transmission(s.detunings[i], rc.model.kappa0, rc.model.kappa_ext));
        dev = std::max(dev, std::abs(s.transmission[i] - empty.back()));
    }
    Json extra;
    extra["empty_cavity_transmission"] = empty;
    write_spectrum(write, rc, s, nullptr, extra);
    report.summary = "pulsed " + s.geometry + ": max |T - T_empty| = " + fmt(dev, 4);
    for (const auto& w : s.warnings)
        report.summary += "; warning: " + w;
    return report;
}

inline RunReport run_transit(const RunConfig& rc) {
    RunReport report;
    Writer write(rc, report);
    const auto& t = rc.transit;
    double g_top = *std::max_element(t.g_peaks.begin(), t.g_peaks.end()) * (1.0 + 5.0 * t.spec.peak_jitter);
    if (!(g_top > 0.0))
        g_top = units::mhz_to_rad(1.0);
    const auto table = transit::on_resonance_table(rc.model, t.geometry, g_top, t.table_points);

    std::vector<transit::EnsembleSummary> rows;
    std::string jsonl;
    for (std::size_t k = 0; k < t.g_peaks.size(); ++k) {
        auto spec = t.spec;
        spec.g_peak = t.g_peaks[k];
        const auto ens = transit::run_ensemble(spec, table, t.trigger, t.runs, rc.seed + k * t.runs, t.keep_records);
        rows.push_back(ens.summary);
        jsonl += transit::outcomes_jsonl(ens, rc.hash);
    }
    write("_outcomes.jsonl", jsonl);
    write("_summary.csv", transit::summary_csv(rows, rc.hash));

    report.summary = "transit: trigger rates";
    for (const auto& s : rows)
        report.summary += " " + fmt(units::rad_to_mhz(s.g_peak), 1) + " MHz: " + fmt(s.trigger_rate(), 3);
    report.summary += " (detector efficiency " + fmt(t.trigger.detector_efficiency, 2) + ")";
    return report;
}

}  // namespace detail

inline RunReport run(const RunConfig& rc) {
    if (rc.scenario == "fields") return detail::run_fields(rc);
    if (rc.scenario == "spectrum") return detail::run_spectrum(rc);
    if (rc.scenario == "averaged") return detail::run_averaged(rc);
    if (rc.scenario == "fit") return detail::run_fit(rc);
    if (rc.scenario == "legacy") return detail::run_legacy(rc);
    if (rc.scenario == "pulsed") return detail::run_pulsed(rc);
    if (rc.scenario == "transit") return detail::run_transit(rc);
    throw ConfigError("unknown scenario '" + rc.scenario + "'");
}

// Transition strengths, Lande factors and mode-overlap table.
inline std::vector<std::filesystem::path> export_reference_tables(const std::filesystem::path& dir) {
    using spectra::format_number;
    std::vector<std::filesystem::path> files;

    std::string rows;
    for (const auto& t : atom::transition_table().entries)
        rows += std::to_string(t.m_g) + "," + std::to_string(t.m_e) + "," + std::to_string(t.q) + "," +
                format_number(t.amplitude) + "," + format_number(t.amplitude * t.amplitude) + "\n";
    files.push_back(dir / "transitions.csv");
    write_text(files.back(), "m_g,m_e,q,amplitude,strength\n" + rows);

    const atom::AtomParams p;
    rows = "ground,5S1/2,3," + format_number(p.gF_ground) + "\nexcited,5P3/2,4," + format_number(p.gF_excited) + "\n";
    files.push_back(dir / "lande.csv");
    write_text(files.back(), "manifold,term,F,g_F\n" + rows);

    rows.clear();
    const double r = fields::longitudinal_ratio(fields::silica_vacuum());
    const std::vector<std::pair<std::string, fields::ModePolarization>> modes{
        {"TM+", fields::ModePolarization::tm(r, fields::Sense::plus)},
        {"TM-", fields::ModePolarization::tm(r, fields::Sense::minus)},
        {"TE+", fields::ModePolarization::te(fields::Sense::plus)},
        {"TE-", fields::ModePolarization::te(fields::Sense::minus)}};
    for (const auto& [name, pol] : modes) {
        const auto u = fields::mode_couplings(pol);
        rows += format_number(fields::silica_index) + "," + name + "," + format_number(std::norm(u[2])) + "," +
                format_number(std::norm(u[1])) + "," + format_number(std::norm(u[0])) + "\n";
    }
    files.push_back(dir / "overlaps.csv");
    write_text(files.back(), "refractive_index,mode,sigma_plus,pi,sigma_minus\n" + rows);
    return files;
}

}  // namespace wgm::cli
