// fields.hpp - evanescent-field polarization of whispering-gallery modes
//
// Basis convention: local cylindrical unit vectors (e_r, e_phi, e_z) at the
// atom position, with z the resonator axis and quantization axis. Spherical
// polarization vectors are e_{+-1} = (e_r +- i e_phi)/sqrt(2), e_0 = e_z.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wgmqed/errors.hpp"

namespace wgm::fields {

using cplx = std::complex<double>;
using Vector3c = Eigen::Vector3cd;

inline constexpr double silica_index = 1.45;

// Ratio n2/n1 of outer to inner refractive index.
class RefractiveRatio {
  public:
    explicit RefractiveRatio(double n) : n_(n) {
        if (!(n > 0.0 && n <= 1.0))
            throw DomainError("refractive ratio must lie in (0, 1], got " + std::to_string(n));
    }

    static RefractiveRatio from_indices(double n_inner, double n_outer) {
        return RefractiveRatio(n_outer / n_inner);
    }

    double value() const { return n_; }

  private:
    double n_;
};

inline RefractiveRatio silica_vacuum() { return RefractiveRatio::from_indices(silica_index, 1.0); }

enum class Sense { plus, minus };
enum class ModeClass { TM, TE };

struct ModePolarization {
    double a_trans = 1.0;  // radial (TM) or axial (TE) amplitude
    double a_long = 0.0;   // azimuthal amplitude, zero for TE
    Sense sense = Sense::plus;
    ModeClass mode_class = ModeClass::TM;

    static ModePolarization tm(double ratio, Sense s) { return {1.0, ratio, s, ModeClass::TM}; }
    static ModePolarization te(Sense s) { return {1.0, 0.0, s, ModeClass::TE}; }
};

inline void validate(const ModePolarization& pol) {
    if (pol.a_trans < 0.0 || pol.a_long < 0.0)
        throw DomainError("mode amplitudes must be non-negative");
    if (pol.mode_class == ModeClass::TE && pol.a_long != 0.0)
        throw DomainError("TE modes carry no longitudinal component");
}

struct EvanescentComponents {
    double e_r = 0.0;
    double e_phi = 0.0;  // physical field carries an extra factor +i
    double theta = 0.0;
};

inline double critical_angle(RefractiveRatio n) { return std::asin(n.value()); }

// TM evanescent amplitudes under total internal reflection, E0 = 1.
inline EvanescentComponents evanescent_components(double theta, RefractiveRatio ratio) {
    const double n = ratio.value();
    if (n >= 1.0)
        throw DomainError("total internal reflection needs n < 1");
    const double theta_c = critical_angle(ratio);
    // allow a few ulps below arcsin(n) so the critical angle itself is accepted
    if (theta < theta_c - 1e-14 || theta > std::numbers::pi / 2)
        throw DomainError("angle of incidence outside [critical angle, pi/2]");

    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double n2 = n * n;
    const double under_root = std::max(s * s - n2, 0.0);
    const double denom = std::sqrt(n2 * n2 * c * c + s * s - n2);

    return {2.0 * c * s / denom, 2.0 * c * std::sqrt(under_root) / denom, theta};
}

// |E_phi / E_r| at grazing incidence.
inline double longitudinal_ratio(double n) {
    if (n < 0.0 || n > 1.0)
        throw DomainError("refractive ratio must lie in [0, 1]");
    return std::sqrt(1.0 - n * n);
}

inline double longitudinal_ratio(RefractiveRatio n) { return longitudinal_ratio(n.value()); }

inline Vector3c mode_amplitude_vector(const ModePolarization& pol, bool normalize = true) {
    validate(pol);
    Vector3c v = Vector3c::Zero();
    if (pol.mode_class == ModeClass::TE) {
        v(2) = pol.a_trans;
    } else {
        const double sign = pol.sense == Sense::plus ? 1.0 : -1.0;
        v(0) = pol.a_trans;
        v(1) = cplx(0.0, sign * pol.a_long);
    }
    const double norm = v.norm();
    if (norm == 0.0)
        throw DegenerateInputError("mode amplitude vector is zero");
    if (normalize)
        v /= norm;
    return v;
}

// Spherical unit vector e_q in the (e_r, e_phi, e_z) basis.
inline Vector3c spherical_unit(int q) {
    const double h = 1.0 / std::sqrt(2.0);
    switch (q) {
        case +1: return Vector3c(h, cplx(0.0, h), 0.0);
        case -1: return Vector3c(h, cplx(0.0, -h), 0.0);
        case 0: return Vector3c(0.0, 0.0, 1.0);
        default: throw DomainError("spherical index must be -1, 0 or +1");
    }
}

// Complex projection e_q^* . v / |v|; its squared modulus is the overlap.
inline cplx spherical_component(const Vector3c& v, int q) {
    const double norm = v.norm();
    if (norm == 0.0)
        throw DegenerateInputError("cannot project a zero vector");
    return spherical_unit(q).dot(v) / norm;  // Eigen's dot conjugates the left operand
}

inline double circular_overlap(const Vector3c& v, int q) { return std::norm(spherical_component(v, q)); }

// Coupling amplitudes u_q, indexed by q + 1, of a mode to sigma_q transitions.
inline std::array<cplx, 3> mode_couplings(const ModePolarization& pol) {
    const Vector3c v = mode_amplitude_vector(pol);
    return {spherical_component(v, -1), spherical_component(v, 0), spherical_component(v, +1)};
}

struct IntensityContrast {
    double contrast = 0.0;      // (Imax - Imin) / (Imax + Imin)
    double min_over_max = 0.0;  // Imin / Imax
};

// Equal-amplitude superposition of two counter-propagating modes whose
// longitudinal-to-transversal ratio is `ratio`. The intensity is
// 4 cos^2(phi') + 4 ratio^2 sin^2(phi'), so the extremes do not depend on the
// relative phase.
inline IntensityContrast azimuthal_intensity_contrast(double ratio, double rel_phase) {
    if (ratio < 0.0)
        throw DomainError("amplitude ratio must be non-negative");
    (void)rel_phase;
    const double r2 = ratio * ratio;
    const double lo = std::min(1.0, r2);
    const double hi = std::max(1.0, r2);
    return {(hi - lo) / (hi + lo), lo / hi};
}

// Intensity |E+ e^{i phi} + e^{i delta} E- e^{-i phi}|^2 sampled on a uniform
// azimuth grid over [0, 2 pi), azimuthal mode number fixed to 1.
inline std::vector<double> azimuthal_intensity_profile(double ratio, double rel_phase, int samples) {
    if (ratio < 0.0)
        throw DomainError("amplitude ratio must be non-negative");
    if (samples < 1)
        throw DomainError("need at least one azimuth sample");
    const Vector3c e_plus(1.0, cplx(0.0, ratio), 0.0);
    const Vector3c e_minus(1.0, cplx(0.0, -ratio), 0.0);
    const cplx phase_b = std::polar(1.0, rel_phase);

    std::vector<double> out(samples);
    for (int k = 0; k < samples; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / samples;
        const Vector3c e = std::polar(1.0, phi) * e_plus + phase_b * std::polar(1.0, -phi) * e_minus;
        out[k] = e.squaredNorm();
    }
    return out;
}

struct CouplingProfile {
    double g_ref = 0.0;         // rad/s at d_ref
    double d_ref = 50e-9;       // m
    double decay_length = 118e-9;  // m
    double d_min = 50e-9;       // m
};

inline double coupling_vs_distance(double d, const CouplingProfile& p) {
    if (!(p.g_ref > 0.0 && p.d_ref > 0.0 && p.decay_length > 0.0 && p.d_min > 0.0))
        throw DomainError("coupling profile parameters must be positive");
    if (d < p.d_min)
        throw OutOfModelError("atom-surface distance below the usable range; surface shifts dominate");
    return p.g_ref * std::exp(-(d - p.d_ref) / p.decay_length);
}

}  // namespace wgm::fields
