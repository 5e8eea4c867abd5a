// io.hpp - CSV and JSON serialization of spectra and fit results
//
// CSV files start with '#' comment lines (geometry, config hash) followed by
// the header `detuning_MHz,transmission[,model_transmission]`. Numbers are
// written with a fixed format so identical inputs give identical bytes.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wgmqed/errors.hpp"
#include "wgmqed/spectra/fit.hpp"
#include "wgmqed/spectra/sweep.hpp"
#include "wgmqed/units.hpp"

namespace wgm::spectra {

inline std::uint64_t fnv1a_64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string spectrum_csv(const SpectrumResult& s, const std::string& config_hash,
                                const std::vector<double>* model = nullptr) {
    if (s.detunings.size() != s.transmission.size() || (model && model->size() != s.detunings.size()))
        throw DomainError("spectrum columns differ in length");
    std::ostringstream out;
    out << "# geometry: " << s.geometry << "\n";
    out << "# config_hash: " << config_hash << "\n";
    for (const auto& w : s.warnings)
        out << "# warning: " << w << "\n";
    out << "detuning_MHz,transmission" << (model ? ",model_transmission" : "") << "\n";
    for (std::size_t i = 0; i < s.detunings.size(); ++i) {
        out << format_number(units::rad_to_mhz(s.detunings[i])) << "," << format_number(s.transmission[i]);
        if (model)
            out << "," << format_number((*model)[i]);
        out << "\n";
    }
    return out.str();
}

// Parses the CSV layout written above. Comment lines are skipped; a
// `geometry` comment sets the tag.
inline SpectrumResult parse_spectrum_csv(std::istream& in, const std::string& source = "<stream>") {
    SpectrumResult s;
    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const std::string key = "# geometry: ";
            if (line.rfind(key, 0) == 0)
                s.geometry = line.substr(key.size());
            continue;
        }
        if (!header) {
            if (line.rfind("detuning_MHz,transmission", 0) != 0)
                throw ConfigError(source + ":" + std::to_string(line_no) +
                                  ": expected header 'detuning_MHz,transmission'");
            header = true;
            continue;
        }
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected two columns");
        try {
            s.detunings.push_back(units::mhz_to_rad(std::stod(a)));
            s.transmission.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    if (!header)
        throw ConfigError(source + ": no data header found");
    return s;
}

inline SpectrumResult read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open spectrum file '" + path + "'");
    return parse_spectrum_csv(in, path);
}

inline nlohmann::ordered_json to_json(const SpectrumResult& s) {
    nlohmann::ordered_json j;
    j["geometry"] = s.geometry;
    std::vector<double> mhz;
    for (double d : s.detunings)
        mhz.push_back(units::rad_to_mhz(d));
    j["detuning_MHz"] = mhz;
    j["transmission"] = s.transmission;
    j["warnings"] = s.warnings;
    return j;
}

inline nlohmann::ordered_json to_json(const FitResult& f) {
    const double mhz2 = units::mhz_to_rad(1.0) * units::mhz_to_rad(1.0);
    nlohmann::ordered_json j;
    j["g_mean_MHz"] = units::rad_to_mhz(f.g_mean_fit);
    j["g_sigma_MHz"] = units::rad_to_mhz(f.g_sigma_fit);
    j["residual_norm"] = f.residual_norm;
    j["covariance_MHz2"] = {{f.covariance(0, 0) / mhz2, f.covariance(0, 1) / mhz2},
                            {f.covariance(1, 0) / mhz2, f.covariance(1, 1) / mhz2}};
    j["start_index"] = f.start_index;
    j["warnings"] = f.warnings;
    j["trace"] = f.trace;
    return j;
}

}  // namespace wgm::spectra
