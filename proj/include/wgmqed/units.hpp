// units.hpp - physical constants and unit conversions
//
// All rates and detunings inside the library are angular frequencies in rad/s.
// User-facing files use MHz with the usual "value / 2pi" convention.

#pragma once

#include <numbers>

namespace wgm::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Bohr magneton over Planck constant, Hz per tesla (CODATA 2018).
inline constexpr double bohr_magneton_hz_per_tesla = 13.996244936e9;

inline constexpr double gauss = 1e-4;  // tesla
inline constexpr double nanometre = 1e-9;
inline constexpr double microsecond = 1e-6;
inline constexpr double nanosecond = 1e-9;

constexpr double mhz_to_rad(double f_mhz) { return two_pi * f_mhz * 1e6; }
constexpr double rad_to_mhz(double omega) { return omega / (two_pi * 1e6); }

}  // namespace wgm::units
