// config.hpp - run configuration: defaults, schema validation, unit conversion
//
// Configs are JSON objects. The default document doubles as the schema: every
// key a config may contain appears in it, with a value of the accepted type.
// Frequencies are given as f / 2pi in MHz (keys ending in _MHz) and converted
// to angular frequencies in rad/s internally. Times carry their unit in the
// key name (_us, _ns).

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wgmqed/errors.hpp"
#include "wgmqed/spectra.hpp"
#include "wgmqed/transit.hpp"
#include "wgmqed/units.hpp"

namespace wgm::cli {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& scenarios() {
    static const std::vector<std::string> s{"fields", "spectrum", "averaged", "fit", "legacy", "pulsed", "transit"};
    return s;
}

inline Json default_config() {
    return Json::parse(R"({
  "scenario": "spectrum",
  "seed": 1,
  "output": {"directory": "wgmqed_out", "prefix": ""},
  "resonator": {
    "kappa0_MHz": 5.0,
    "kappa_ext_MHz": 5.0,
    "refractive_index": 1.45,
    "backscatter_MHz": 0.0,
    "azimuth_phase_rad": 0.0
  },
  "atom": {
    "linewidth_MHz": 6.07,
    "B_gauss": 4.5,
    "zeeman": true,
    "delta_ca_MHz": 0.0,
    "two_level": false
  },
  "drive": {"photon_flux": 1.2e7},
  "numerics": {
    "cutoff_a": 1,
    "cutoff_b": 1,
    "prune_levels": false,
    "dimension_budget": 200,
    "threads": 1
  },
  "spectrum": {
    "geometry": "co_TM",
    "g_MHz": 20.0,
    "detuning_min_MHz": -60.0,
    "detuning_max_MHz": 60.0,
    "points": 121,
    "noise_sigma": 0.0
  },
  "distribution": {
    "g_mean_MHz": 17.0,
    "g_sigma_MHz": 6.0,
    "g_min_MHz": 7.5,
    "g_max_MHz": 30.0,
    "nodes": 17
  },
  "pulse": {"t_start_ns": null, "t_len_ns": 100.0, "samples": 201, "average": false},
  "fit": {"data_csv": "", "sigma_min_MHz": 0.5, "tolerance": 1e-8, "max_evaluations": 4000},
  "legacy": {"g_over_kappa_max": 1000.0, "g_points": 201},
  "fields": {
    "index_min": 1.3,
    "index_max": 2.0,
    "index_points": 8,
    "angle_points": 31,
    "azimuth_samples": 72,
    "g_ref_MHz": 30.0,
    "distance_min_nm": 50.0,
    "distance_max_nm": 300.0,
    "distance_points": 26
  },
  "transit": {
    "geometry": "co_TM",
    "g_peak_MHz": [10.0, 20.0, 30.0],
    "sigma_t_us": 2.0,
    "duration_us": 12.0,
    "dt_ns": 10.0,
    "peak_jitter": 0.0,
    "runs": 1000,
    "table_points": 61,
    "dt1_us": 1.2,
    "eta1": 6,
    "dt2_us": 1.0,
    "eta2": 2,
    "detector_efficiency": 0.5,
    "spectroscopy_gap_us": 0.5,
    "baseline_floor": 0.0,
    "keep_records": true
  }
})");
}

// 1-based line of the member at `path` in `text`, found by searching the
// quoted key names in order; 0 if it cannot be located.
inline int locate_line(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto found = text.find("\"" + key + "\"", pos);
        if (found == std::string::npos)
            return 0;
        pos = found;
    }
    if (path.empty())
        return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

inline std::string join_path(const std::vector<std::string>& path) {
    std::string s;
    for (const auto& p : path)
        s += "/" + p;
    return s.empty() ? "/" : s;
}

class Diagnostics {
  public:
    Diagnostics(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
        const int line = locate_line(text_, path);
        std::string where = source_;
        if (line > 0)
            where += ":" + std::to_string(line);
        throw ConfigError(where + ": field " + join_path(path) + ": " + message);
    }

  private:
    std::string source_;
    std::string text_;
};

namespace detail {

inline std::string type_name(const Json& j) {
    if (j.is_null()) return "null";
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_array()) return "array";
    return "object";
}

inline bool compatible(const Json& schema, const Json& value) {
    if (schema.is_null())  // optional number
        return value.is_null() || value.is_number();
    if (schema.is_number_integer() || schema.is_number_unsigned())
        return value.is_number_integer() || value.is_number_unsigned() ||
               (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>());
    if (schema.is_number())
        return value.is_number();
    if (schema.is_array()) {
        if (!value.is_array())
            return false;
        return std::all_of(value.begin(), value.end(), [](const Json& v) { return v.is_number(); });
    }
    return schema.type() == value.type();
}

inline std::string expected_name(const Json& schema) {
    if (schema.is_null()) return "number or null";
    if (schema.is_array()) return "array of numbers";
    return type_name(schema);
}

inline void merge(Json& target, const Json& user, const Json& schema, std::vector<std::string>& path,
                  const Diagnostics& diag) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        path.push_back(it.key());
        if (!schema.contains(it.key()))
            diag.fail(path, "unknown key");
        const Json& s = schema[it.key()];
        if (s.is_object()) {
            if (!it.value().is_object())
                diag.fail(path, "expected an object, got " + type_name(it.value()));
            merge(target[it.key()], it.value(), s, path, diag);
        } else {
            if (!compatible(s, it.value()))
                diag.fail(path, "expected " + expected_name(s) + ", got " + type_name(it.value()));
            // normalize number types so equivalent configs hash alike
            if (s.is_number_float() && it.value().is_number())
                target[it.key()] = it.value().get<double>();
            else if ((s.is_number_integer() || s.is_number_unsigned()) && it.value().is_number_float())
                target[it.key()] = static_cast<long long>(it.value().get<double>());
            else
                target[it.key()] = it.value();
        }
        path.pop_back();
    }
}

}  // namespace detail

// Parses and validates a config document, returning the defaults overlaid
// with the user's values.
inline Json resolve_config(const std::string& text, const std::string& source) {
    Json user;
    try {
        user = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const auto byte = std::min<std::size_t>(e.byte, text.size());
        const auto begin = text.begin();
        const int line = 1 + static_cast<int>(std::count(begin, begin + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n'));
        throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    const Diagnostics diag(source, text);
    if (!user.is_object())
        diag.fail({}, "a config must be a JSON object");
    if (!user.contains("scenario"))
        diag.fail({"scenario"}, "required key missing (one of fields, spectrum, averaged, fit, legacy, pulsed, transit)");
    Json resolved = default_config();
    std::vector<std::string> path;
    detail::merge(resolved, user, default_config(), path, diag);
    const auto scenario = resolved["scenario"].get<std::string>();
    if (std::find(scenarios().begin(), scenarios().end(), scenario) == scenarios().end())
        diag.fail({"scenario"}, "unknown scenario '" + scenario + "'");
    return resolved;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Stable hash of the resolved configuration.
inline std::string config_hash(const Json& resolved) { return spectra::hex64(spectra::fnv1a_64(resolved.dump())); }

// Typed view of a resolved config with SI / rad/s units.
struct RunConfig {
    std::string scenario;
    std::uint64_t seed = 1;
    std::string output_directory;
    std::string output_prefix;
    std::string config_dir;  // for resolving relative data paths
    unsigned threads = 1;

    spectra::ModelConfig model;
    spectra::Geometry geometry = spectra::Geometry::co_TM;
    double g_fixed = 0.0;
    std::vector<double> detunings;
    double noise_sigma = 0.0;
    spectra::GDistribution distribution;
    spectra::PulseWindow window;
    bool pulse_average = false;
    std::string fit_data_csv;
    spectra::FitOptions fit;
    double legacy_g_over_kappa_max = 1000.0;
    int legacy_g_points = 201;

    struct Fields {
        double index_min, index_max;
        int index_points, angle_points, azimuth_samples;
        double g_ref;
        double distance_min, distance_max;
        int distance_points;
    } fields{};

    struct Transit {
        spectra::Geometry geometry = spectra::Geometry::co_TM;
        std::vector<double> g_peaks;
        transit::TransitSpec spec;
        std::size_t runs = 0;
        int table_points = 61;
        transit::TriggerConfig trigger;
        bool keep_records = true;
    } transit;

    std::string hash;
    Json resolved;
};

inline RunConfig build_run_config(const Json& c, const std::string& text, const std::string& source,
                                  const std::string& config_dir) {
    const Diagnostics diag(source, text);
    auto num = [&](const char* sec, const char* key) { return c[sec][key].get<double>(); };
    auto integer = [&](const char* sec, const char* key) { return c[sec][key].get<long long>(); };
    auto require = [&](bool ok, const char* sec, const char* key, const std::string& msg) {
        if (!ok)
            diag.fail({sec, key}, msg);
    };
    auto positive = [&](const char* sec, const char* key) {
        const double v = num(sec, key);
        require(v > 0.0 && std::isfinite(v), sec, key, "must be positive");
        return v;
    };
    auto non_negative = [&](const char* sec, const char* key) {
        const double v = num(sec, key);
        require(v >= 0.0 && std::isfinite(v), sec, key, "must be non-negative");
        return v;
    };
    auto min_int = [&](const char* sec, const char* key, long long lo) {
        const long long v = integer(sec, key);
        require(v >= lo, sec, key, "must be at least " + std::to_string(lo));
        return v;
    };
    auto geometry = [&](const char* sec, const char* key) {
        try {
            return spectra::geometry_from_string(c[sec][key].get<std::string>());
        } catch (const DomainError&) {
            diag.fail({sec, key}, "unknown geometry (co_TM, co_TE, counter_TM, counter_TE, empty, legacy)");
        }
    };
    using units::mhz_to_rad;

    RunConfig r;
    r.resolved = c;
    r.hash = config_hash(c);
    r.scenario = c["scenario"].get<std::string>();
    if (!c["seed"].is_number_unsigned())
        diag.fail({"seed"}, "must be a non-negative integer");
    r.seed = c["seed"].get<std::uint64_t>();
    r.output_directory = c["output"]["directory"].get<std::string>();
    r.output_prefix = c["output"]["prefix"].get<std::string>();
    if (r.output_prefix.empty())
        r.output_prefix = r.scenario;
    r.config_dir = config_dir;
    r.threads = static_cast<unsigned>(min_int("numerics", "threads", 0));

    auto& m = r.model;
    m.kappa0 = mhz_to_rad(positive("resonator", "kappa0_MHz"));
    m.kappa_ext = mhz_to_rad(positive("resonator", "kappa_ext_MHz"));
    m.refractive_index = num("resonator", "refractive_index");
    require(m.refractive_index >= 1.0, "resonator", "refractive_index", "must be at least 1 (vacuum outside)");
    m.backscatter = mhz_to_rad(non_negative("resonator", "backscatter_MHz"));
    m.azimuth_phase = num("resonator", "azimuth_phase_rad");
    m.atom.gamma = mhz_to_rad(positive("atom", "linewidth_MHz")) / 2.0;
    m.atom.B_z = non_negative("atom", "B_gauss") * units::gauss;
    m.atom.zeeman = c["atom"]["zeeman"].get<bool>();
    m.delta_ca = mhz_to_rad(num("atom", "delta_ca_MHz"));
    m.two_level = c["atom"]["two_level"].get<bool>();
    m.photon_flux = positive("drive", "photon_flux");
    m.cutoff_a = static_cast<int>(min_int("numerics", "cutoff_a", 1));
    m.cutoff_b = static_cast<int>(min_int("numerics", "cutoff_b", 1));
    m.prune_levels = c["numerics"]["prune_levels"].get<bool>();
    m.dimension_budget = static_cast<std::size_t>(min_int("numerics", "dimension_budget", 1));

    r.geometry = geometry("spectrum", "geometry");
    r.g_fixed = mhz_to_rad(non_negative("spectrum", "g_MHz"));
    const double dmin = num("spectrum", "detuning_min_MHz");
    const double dmax = num("spectrum", "detuning_max_MHz");
    require(dmin <= dmax, "spectrum", "detuning_max_MHz", "must not be below detuning_min_MHz");
    const auto points = min_int("spectrum", "points", 1);
    require(points >= 2 || dmin == dmax, "spectrum", "points", "a detuning range needs at least two points");
    for (long long k = 0; k < points; ++k)
        r.detunings.push_back(mhz_to_rad(points == 1 ? dmin : dmin + (dmax - dmin) * k / (points - 1)));
    r.noise_sigma = non_negative("spectrum", "noise_sigma");

    auto& d = r.distribution;
    d.g_mean = mhz_to_rad(non_negative("distribution", "g_mean_MHz"));
    d.g_sigma = mhz_to_rad(non_negative("distribution", "g_sigma_MHz"));
    d.g_min = mhz_to_rad(non_negative("distribution", "g_min_MHz"));
    d.g_max = mhz_to_rad(positive("distribution", "g_max_MHz"));
    require(d.g_min < d.g_max, "distribution", "g_max_MHz", "must exceed g_min_MHz");
    d.n_nodes = static_cast<int>(min_int("distribution", "nodes", 1));

    const Json& ts = c["pulse"]["t_start_ns"];
    if (!ts.is_null()) {
        require(ts.get<double>() >= 0.0, "pulse", "t_start_ns", "must be non-negative");
        r.window.t_start = ts.get<double>() * 1e-9;
    }
    r.window.t_len = positive("pulse", "t_len_ns") * 1e-9;
    r.window.samples = static_cast<int>(min_int("pulse", "samples", 2));
    r.pulse_average = c["pulse"]["average"].get<bool>();

    r.fit_data_csv = c["fit"]["data_csv"].get<std::string>();
    r.fit.sigma_min = mhz_to_rad(positive("fit", "sigma_min_MHz"));
    r.fit.tolerance = positive("fit", "tolerance");
    r.fit.max_evaluations = static_cast<int>(min_int("fit", "max_evaluations", 10));
    r.fit.threads = r.threads;

    r.legacy_g_over_kappa_max = positive("legacy", "g_over_kappa_max");
    r.legacy_g_points = static_cast<int>(min_int("legacy", "g_points", 2));

    auto& f = r.fields;
    f.index_min = num("fields", "index_min");
    f.index_max = num("fields", "index_max");
    require(f.index_min > 1.0, "fields", "index_min", "must exceed 1 for total internal reflection");
    require(f.index_max >= f.index_min, "fields", "index_max", "must not be below index_min");
    f.index_points = static_cast<int>(min_int("fields", "index_points", 1));
    f.angle_points = static_cast<int>(min_int("fields", "angle_points", 2));
    f.azimuth_samples = static_cast<int>(min_int("fields", "azimuth_samples", 1));
    f.g_ref = mhz_to_rad(positive("fields", "g_ref_MHz"));
    f.distance_min = positive("fields", "distance_min_nm") * units::nanometre;
    f.distance_max = positive("fields", "distance_max_nm") * units::nanometre;
    require(f.distance_max >= f.distance_min, "fields", "distance_max_nm", "must not be below distance_min_nm");
    f.distance_points = static_cast<int>(min_int("fields", "distance_points", 1));

    auto& t = r.transit;
    t.geometry = geometry("transit", "geometry");
    require(t.geometry == spectra::Geometry::co_TM || t.geometry == spectra::Geometry::co_TE, "transit", "geometry",
            "transit detection uses co_TM or co_TE");
    for (const auto& g : c["transit"]["g_peak_MHz"]) {
        require(g.get<double>() >= 0.0, "transit", "g_peak_MHz", "entries must be non-negative");
        t.g_peaks.push_back(mhz_to_rad(g.get<double>()));
    }
    require(!t.g_peaks.empty(), "transit", "g_peak_MHz", "needs at least one value");
    t.spec.sigma_t = positive("transit", "sigma_t_us") * units::microsecond;
    t.spec.duration = positive("transit", "duration_us") * units::microsecond;
    t.spec.dt = positive("transit", "dt_ns") * units::nanosecond;
    require(t.spec.dt <= t.spec.sigma_t / 4.0, "transit", "dt_ns", "must resolve the transit (dt <= sigma_t / 4)");
    t.spec.peak_jitter = non_negative("transit", "peak_jitter");
    t.runs = static_cast<std::size_t>(min_int("transit", "runs", 1));
    t.table_points = static_cast<int>(min_int("transit", "table_points", 2));
    t.trigger.dt1 = positive("transit", "dt1_us") * units::microsecond;
    t.trigger.eta1 = static_cast<int>(min_int("transit", "eta1", 1));
    t.trigger.dt2 = positive("transit", "dt2_us") * units::microsecond;
    t.trigger.eta2 = static_cast<int>(min_int("transit", "eta2", 1));
    t.trigger.detector_efficiency = positive("transit", "detector_efficiency");
    require(t.trigger.detector_efficiency <= 1.0, "transit", "detector_efficiency", "must not exceed 1");
    t.trigger.probe_flux = m.photon_flux;
    t.trigger.spectroscopy_gap = non_negative("transit", "spectroscopy_gap_us") * units::microsecond;
    t.trigger.baseline_floor = non_negative("transit", "baseline_floor");
    require(t.trigger.baseline_floor <= 1.0, "transit", "baseline_floor", "must not exceed 1");
    t.keep_records = c["transit"]["keep_records"].get<bool>();
    return r;
}

inline RunConfig load_run_config(const std::string& path) {
    const std::string text = read_file(path);
    const auto slash = path.find_last_of('/');
    const std::string dir = slash == std::string::npos ? "." : path.substr(0, slash);
    return build_run_config(resolve_config(text, path), text, path, dir);
}

}  // namespace wgm::cli
