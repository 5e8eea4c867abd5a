#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "wgmqed/fields.hpp"
#include "wgmqed/units.hpp"

using namespace wgm;
using namespace wgm::fields;

namespace {

// Transversality of the evanescent plane wave: E . k = 0 with
// k = (beta, i kappa), so |E_phi / E_r| = kappa / beta.
double transversality_ratio(double theta, double n) {
    const double s = std::sin(theta);
    return std::sqrt(s * s - n * n) / s;
}

}  // namespace

TEST(Fields, LongitudinalRatioOfSilica) {
    const double n = 1.0 / 1.45;
    EXPECT_NEAR(longitudinal_ratio(silica_vacuum()), std::sqrt(1.0 - n * n), 1e-15);
    EXPECT_NEAR(longitudinal_ratio(silica_vacuum()), 0.72414, 1e-5);
}

TEST(Fields, EvanescentComponentsAreTransverseToTheWaveVector) {
    const auto ratio = silica_vacuum();
    const double tc = critical_angle(ratio);
    for (double f : {0.05, 0.3, 0.6, 0.9, 0.999}) {
        const double theta = tc + f * (std::numbers::pi / 2 - tc);
        const auto e = evanescent_components(theta, ratio);
        EXPECT_NEAR(e.e_phi / e.e_r, transversality_ratio(theta, ratio.value()), 1e-12) << theta;
    }
}

TEST(Fields, EvanescentAmplitudesAtEightyDegrees) {
    const auto e = evanescent_components(80.0 * std::numbers::pi / 180.0, silica_vacuum());
    EXPECT_NEAR(e.e_r, 0.483, 1e-3);
    EXPECT_NEAR(e.e_phi, 0.345, 1e-3);
    EXPECT_NEAR(e.e_phi / e.e_r, 0.714, 1e-3);
}

TEST(Fields, CriticalAngleHasNoLongitudinalComponent) {
    const auto ratio = silica_vacuum();
    const auto e = evanescent_components(critical_angle(ratio), ratio);
    EXPECT_NEAR(e.e_phi, 0.0, 1e-6);
    EXPECT_GT(e.e_r, 0.0);
}

TEST(Fields, GrazingIncidenceApproachesLongitudinalRatio) {
    const auto ratio = silica_vacuum();
    const auto e = evanescent_components(std::numbers::pi / 2 - 1e-7, ratio);
    EXPECT_NEAR(e.e_phi / e.e_r, longitudinal_ratio(ratio), 1e-9);
}

TEST(Fields, InvalidGeometryIsRejected) {
    EXPECT_THROW(RefractiveRatio(1.2), DomainError);
    EXPECT_THROW(RefractiveRatio(0.0), DomainError);
    EXPECT_THROW(evanescent_components(0.1, silica_vacuum()), DomainError);
    EXPECT_THROW(evanescent_components(1.0, RefractiveRatio(1.0)), DomainError);
}

TEST(Fields, SilicaTmOverlapWithCircularPolarization) {
    const auto u = mode_couplings(ModePolarization::tm(longitudinal_ratio(silica_vacuum()), Sense::plus));
    EXPECT_NEAR(std::norm(u[2]), 0.975, 1e-3);
    EXPECT_GT(std::norm(u[2]), 0.96);
    EXPECT_NEAR(std::norm(u[1]), 0.0, 1e-15);
    EXPECT_NEAR(std::norm(u[0]), 0.025, 1e-3);
    // closed form (1 + r)^2 / (2 (1 + r^2))
    const double r = longitudinal_ratio(silica_vacuum());
    EXPECT_NEAR(std::norm(u[2]), (1 + r) * (1 + r) / (2 * (1 + r * r)), 1e-14);
}

TEST(Fields, OverlapIncreasesWithRefractiveIndex) {
    double previous = 0.0;
    for (double n : {1.3, 1.45, 1.6, 2.0, 2.5}) {
        const double r = longitudinal_ratio(RefractiveRatio::from_indices(n, 1.0));
        const double overlap = std::norm(mode_couplings(ModePolarization::tm(r, Sense::plus))[2]);
        EXPECT_GT(overlap, previous) << n;
        previous = overlap;
    }
}

TEST(Fields, CouplingsAreNormalizedAndSenseSwapsHelicity) {
    for (double r : {0.0, 0.1, 0.5, 0.72, 1.0, 1.7}) {
        const auto up = mode_couplings(ModePolarization::tm(r, Sense::plus));
        const auto um = mode_couplings(ModePolarization::tm(r, Sense::minus));
        EXPECT_NEAR(std::norm(up[0]) + std::norm(up[1]) + std::norm(up[2]), 1.0, 1e-14);
        EXPECT_NEAR(std::norm(up[2]), std::norm(um[0]), 1e-14);
        EXPECT_NEAR(std::norm(up[0]), std::norm(um[2]), 1e-14);
    }
    const auto te = mode_couplings(ModePolarization::te(Sense::plus));
    EXPECT_NEAR(std::abs(te[1]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(te[0]) + std::abs(te[2]), 0.0, 1e-15);
}

TEST(Fields, PerfectCircularPolarizationAtUnitRatio) {
    const auto u = mode_couplings(ModePolarization::tm(1.0, Sense::plus));
    EXPECT_NEAR(std::norm(u[2]), 1.0, 1e-14);
}

TEST(Fields, ZeroAmplitudeIsDegenerate) {
    ModePolarization p{0.0, 0.0, Sense::plus, ModeClass::TM};
    EXPECT_THROW(mode_amplitude_vector(p), DegenerateInputError);
}

TEST(Fields, IntensityContrastMatchesSampledProfile) {
    const double r = longitudinal_ratio(silica_vacuum());
    for (double phase : {0.0, 0.7, 2.0}) {
        const auto c = azimuthal_intensity_contrast(r, phase);
        EXPECT_NEAR(c.contrast, (1 - r * r) / (1 + r * r), 1e-14);
        const auto profile = azimuthal_intensity_profile(r, phase, 720);
        const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
        EXPECT_NEAR(*lo / *hi, c.min_over_max, 1e-4);
    }
    // transversal limit: full contrast standing wave
    EXPECT_NEAR(azimuthal_intensity_contrast(0.0, 0.0).contrast, 1.0, 1e-15);
    EXPECT_NEAR(azimuthal_intensity_contrast(1.0, 0.0).contrast, 0.0, 1e-15);
}

TEST(Fields, CouplingDecaysWithDistance) {
    CouplingProfile p;
    p.g_ref = units::mhz_to_rad(30.0);
    EXPECT_NEAR(coupling_vs_distance(50e-9, p), p.g_ref, 1e-6);
    EXPECT_NEAR(coupling_vs_distance(168e-9, p), p.g_ref / std::exp(1.0), 1e-3);
    EXPECT_THROW(coupling_vs_distance(40e-9, p), OutOfModelError);
}
