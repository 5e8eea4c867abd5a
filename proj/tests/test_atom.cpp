#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "wgmqed/atom.hpp"

using namespace wgm;
using namespace wgm::atom;

namespace {

// Closed forms of <j m; 1 q | j+1 m+q>.
double cg_stretch_up(int j, int m, int q) {
    const double d = (2.0 * j + 1.0);
    if (q == +1)
        return std::sqrt((j + m + 1.0) * (j + m + 2.0) / (d * (2.0 * j + 2.0)));
    if (q == 0)
        return std::sqrt((j - m + 1.0) * (j + m + 1.0) / (d * (j + 1.0)));
    return std::sqrt((j - m + 1.0) * (j - m + 2.0) / (d * (2.0 * j + 2.0)));
}

}  // namespace

TEST(Atom, TableMatchesClosedFormClebschGordan) {
    for (const auto& t : transition_table().entries)
        EXPECT_NEAR(t.amplitude, cg_stretch_up(3, t.m_g, t.q), 1e-14) << t.m_g << "->" << t.m_e;
}

TEST(Atom, TableCountMatchesBruteForceEnumeration) {
    int count = 0;
    for (int mg = -3; mg <= 3; ++mg)
        for (int me = -4; me <= 4; ++me)
            if (std::abs(me - mg) <= 1)
                ++count;
    EXPECT_EQ(count, 21);
    EXPECT_EQ(transition_table().entries.size(), static_cast<std::size_t>(count));
}

TEST(Atom, CyclingTransitionAndSuppressedNeighbour) {
    const auto table = transition_table();
    const auto cycling = table.find(3, 4);
    const auto weak = table.find(3, 2);
    ASSERT_TRUE(cycling && weak);
    EXPECT_NEAR(cycling->amplitude, 1.0, 1e-15);
    EXPECT_NEAR(weak->amplitude * weak->amplitude / (cycling->amplitude * cycling->amplitude), 1.0 / 28.0, 1e-15);
}

TEST(Atom, ForbiddenTransitionsThrow) {
    EXPECT_THROW(dipole_amplitude(0, 2), DomainError);
    EXPECT_THROW(dipole_amplitude(4, 4), DomainError);
}

TEST(Atom, ClebschGordanOrthonormality) {
    // sum over m1 of |<j1 m1; j2 M-m1 | J M>|^2 = 1 for every coupled state
    for (int tj1 : {1, 2, 3, 6})
        for (int tj2 : {1, 2, 3}) {
            for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2)
                for (int tM = -tJ; tM <= tJ; tM += 2) {
                    double s = 0.0;
                    for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
                        const int tm2 = tM - tm1;
                        if (std::abs(tm2) > tj2)
                            continue;
                        const double c = clebsch_gordan_2(tj1, tm1, tj2, tm2, tJ, tM);
                        s += c * c;
                    }
                    EXPECT_NEAR(s, 1.0, 1e-12) << tj1 << " " << tj2 << " " << tJ << " " << tM;
                }
        }
}

TEST(Atom, ClebschGordanKnownValues) {
    EXPECT_NEAR(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0), -1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(clebsch_gordan(1, 0, 1, 0, 1, 0), 0.0, 1e-15);
}

TEST(Atom, DecayFromEveryExcitedSublevelIsNormalized) {
    const auto ch = decay_channels(transition_table(), 1.0);
    std::map<int, double> total;
    for (const auto& c : ch)
        for (const auto& t : c.terms)
            total[t.m_e] += t.amplitude * t.amplitude;
    EXPECT_EQ(total.size(), 9u);
    for (const auto& [m, s] : total)
        EXPECT_NEAR(s, 1.0, 1e-12) << m;
    EXPECT_THROW(decay_channels(transition_table(), 0.0), DomainError);
}

TEST(Atom, LandeFactorsOfRb85) {
    const AtomParams p;
    EXPECT_NEAR(p.gF_ground, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(p.gF_excited, 0.5, 1e-15);
    EXPECT_EQ(lande_gF(0.5, 0.5, 0.0, 2.0), 0.0);
}

TEST(Atom, ZeemanShiftOfCyclingTransition) {
    const auto m = rb85_cycling_model();
    const double shift = m.levels[m.require_index(Manifold::excited, 4)].energy_shift -
                         m.levels[m.require_index(Manifold::ground, 3)].energy_shift;
    // (gF' m' - gF m) muB B / h = (2 - 1) x 1.3996 MHz/G x 4.5 G
    EXPECT_NEAR(units::rad_to_mhz(shift), 1.3996244936 * 4.5, 1e-9);
    AtomParams off;
    off.zeeman = false;
    for (const auto& l : rb85_cycling_model(off).levels)
        EXPECT_EQ(l.energy_shift, 0.0);
}

TEST(Atom, LevelOrderingAndLookup) {
    const auto m = rb85_cycling_model();
    ASSERT_EQ(m.size(), 16u);
    EXPECT_EQ(m.require_index(Manifold::ground, -3), 0u);
    EXPECT_EQ(m.require_index(Manifold::excited, 4), 15u);
    EXPECT_THROW(m.require_index(Manifold::ground, 4), DomainError);
}

TEST(Atom, PruningKeepsTheCyclingManifold) {
    const auto full = rb85_cycling_model();
    const auto pruned = prune_levels(full, 3, {+1, -1}, 1);
    EXPECT_TRUE(pruned.pruned);
    EXPECT_LT(pruned.size(), full.size());
    EXPECT_TRUE(pruned.index_of(Manifold::ground, 3));
    EXPECT_TRUE(pruned.index_of(Manifold::excited, 4));
    EXPECT_FALSE(pruned.index_of(Manifold::ground, -3));
    for (const auto& t : pruned.transitions.entries) {
        EXPECT_TRUE(pruned.index_of(Manifold::ground, t.m_g));
        EXPECT_TRUE(pruned.index_of(Manifold::excited, t.m_e));
    }
}

TEST(Atom, TwoLevelModel) {
    const auto m = two_level_model(+1);
    EXPECT_EQ(m.size(), 2u);
    ASSERT_EQ(m.transitions.entries.size(), 1u);
    EXPECT_EQ(m.transitions.entries[0].amplitude, 1.0);
    EXPECT_THROW(two_level_model(2), DomainError);
}
