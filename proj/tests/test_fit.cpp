#include <cmath>

#include <gtest/gtest.h>

#include "wgmqed/spectra.hpp"

using namespace wgm;
using namespace wgm::spectra;

namespace {

double mhz(double f) { return units::mhz_to_rad(f); }

GDistribution template_dist(int nodes = 17) { return {mhz(17.0), mhz(6.0), mhz(7.5), mhz(30.0), nodes}; }

// Tabulated two-level spectra on the template nodes, shared by all tests.
class FitTest : public ::testing::Test {
  protected:
    static void SetUpTestSuite() {
        cfg_.two_level = true;
        for (double f = -30.0; f <= 30.0 + 1e-9; f += 1.0)
            det_.push_back(mhz(f));
        table_ = tabulate_for_fit(cfg_, Geometry::co_TM, det_, template_dist(), 1);
    }

    static SpectrumResult synthetic(double g_mean, double g_sigma) {
        GDistribution d = template_dist();
        d.g_mean = mhz(g_mean);
        d.g_sigma = mhz(g_sigma);
        return {det_, table_.average(truncated_normal_rule(d).weights), "co_TM", {}};
    }

    static inline ModelConfig cfg_;
    static inline std::vector<double> det_;
    static inline SpectrumTable table_;
};

}  // namespace

TEST_F(FitTest, NoiselessRoundTrip) {
    for (auto [gm, gs] : {std::pair{17.0, 6.0}, std::pair{22.0, 3.0}, std::pair{12.0, 8.0}}) {
        const auto f = fit_spectrum_table(synthetic(gm, gs), table_, template_dist());
        EXPECT_NEAR(units::rad_to_mhz(f.g_mean_fit), gm, 1e-3);
        EXPECT_NEAR(units::rad_to_mhz(f.g_sigma_fit), gs, 1e-3);
        EXPECT_LT(f.residual_norm, 1e-6);
        EXPECT_GE(f.start_index, 0);
        EXPECT_EQ(f.trace.size(), 3u);
        EXPECT_TRUE(f.warnings.empty());
    }
}

TEST_F(FitTest, NoisyRoundTripWithCovariance) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto data = add_noise(synthetic(17.0, 6.0), 0.01, seed);
        const auto f = fit_spectrum_table(data, table_, template_dist());
        EXPECT_NEAR(units::rad_to_mhz(f.g_mean_fit), 17.0, 1.0) << seed;
        EXPECT_NEAR(units::rad_to_mhz(f.g_sigma_fit), 6.0, 1.0) << seed;
        // residual of pure noise: sqrt(N) x 0.01
        EXPECT_NEAR(f.residual_norm / std::sqrt(double(det_.size())), 0.01, 0.004);
        const Eigen::Matrix2d c = f.covariance;
        EXPECT_GT(c(0, 0), 0.0);
        EXPECT_GT(c.determinant(), 0.0);
        EXPECT_NEAR(c(0, 1), c(1, 0), 1e-12 * std::abs(c(0, 0)));
        // 1-sigma error of the mean a fraction of a MHz for this noise level
        EXPECT_LT(std::sqrt(c(0, 0)), mhz(1.0));
    }
}

TEST_F(FitTest, BoundaryWarning) {
    const auto f = fit_spectrum_table(synthetic(7.5, 4.0), table_, template_dist());
    bool pinned = false;
    for (const auto& w : f.warnings)
        pinned = pinned || w.find("g_mean pinned") != std::string::npos;
    EXPECT_TRUE(pinned);
}

TEST_F(FitTest, ExhaustedBudgetRaisesWithTrace) {
    FitOptions opt;
    opt.max_evaluations = 1;
    try {
        fit_spectrum_table(synthetic(17.0, 6.0), table_, template_dist(), opt);
        FAIL();
    } catch (const FitError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("start 0"), std::string::npos);
        EXPECT_NE(msg.find("start 2"), std::string::npos);
    }
}

TEST_F(FitTest, InputValidation) {
    const auto data = synthetic(17.0, 6.0);
    EXPECT_THROW(fit_spectrum_table(data, table_, template_dist(1)), DomainError);
    EXPECT_THROW(fit_spectrum_table(data, table_, template_dist(9)), ConsistencyError);
    SpectrumResult shifted = data;
    shifted.detunings[0] += 1.0;
    EXPECT_THROW(fit_spectrum_table(shifted, table_, template_dist()), ConsistencyError);
    FitOptions opt;
    opt.sigma_min = mhz(40.0);
    EXPECT_THROW(fit_spectrum_table(data, table_, template_dist(), opt), DomainError);
    SpectrumResult tiny{{0.0, 1.0}, {0.1, 0.2}, "co_TM", {}};
    EXPECT_THROW(fit_spectrum_table(tiny, table_, template_dist()), DomainError);
}

TEST_F(FitTest, JsonReportsMegahertz) {
    const auto f = fit_spectrum_table(synthetic(17.0, 6.0), table_, template_dist());
    const auto j = to_json(f);
    EXPECT_NEAR(j["g_mean_MHz"].get<double>(), 17.0, 1e-3);
    EXPECT_NEAR(j["g_sigma_MHz"].get<double>(), 6.0, 1e-3);
}

TEST(FitDirect, TabulatesAndFitsInOneCall) {
    ModelConfig cfg;
    cfg.two_level = true;
    std::vector<double> det;
    for (double f = -30.0; f <= 30.0 + 1e-9; f += 3.0)
        det.push_back(mhz(f));
    auto tmpl = template_dist(9);
    const auto data = averaged_spectrum(cfg, Geometry::co_TM, det, tmpl, 1);
    tmpl.g_sigma = 0.0;  // width of the template is irrelevant
    const auto f = fit_spectrum(data, cfg, Geometry::co_TM, tmpl);
    EXPECT_NEAR(units::rad_to_mhz(f.g_mean_fit), 17.0, 1e-3);
    EXPECT_NEAR(units::rad_to_mhz(f.g_sigma_fit), 6.0, 1e-3);
}

TEST(Noise, DeterministicAndCalibrated) {
    SpectrumResult s{std::vector<double>(20000, 0.0), std::vector<double>(20000, 0.5), "co_TM", {}};
    const auto a = add_noise(s, 0.02, 42);
    const auto b = add_noise(s, 0.02, 42);
    EXPECT_EQ(a.transmission, b.transmission);
    double m = 0.0, v = 0.0;
    for (double t : a.transmission)
        m += t;
    m /= a.transmission.size();
    for (double t : a.transmission)
        v += (t - m) * (t - m);
    v /= a.transmission.size() - 1;
    EXPECT_NEAR(m, 0.5, 5 * 0.02 / std::sqrt(20000.0));
    EXPECT_NEAR(std::sqrt(v), 0.02, 0.001);
    EXPECT_THROW(add_noise(s, -1.0, 1), DomainError);
}
