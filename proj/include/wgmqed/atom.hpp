// atom.hpp - hyperfine Zeeman structure of the 85Rb D2 line F=3 -> F'=4
//
// Angular momenta that may be half-integer are passed as doubled integers
// ("two_j") to the Clebsch-Gordan routine so that all arithmetic stays exact
// until the final square root.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wgmqed/errors.hpp"
#include "wgmqed/units.hpp"

namespace wgm::atom {

inline double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k)
        r *= k;
    return r;
}

// <j1 m1; j2 m2 | j m> with every argument doubled. Condon-Shortley phases.
inline double clebsch_gordan_2(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m) {
    if (two_m1 + two_m2 != two_m)
        return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m) > two_j)
        return 0.0;
    if (two_j < std::abs(two_j1 - two_j2) || two_j > two_j1 + two_j2)
        return 0.0;
    if ((two_j1 + two_j2 + two_j) % 2 != 0 || (two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 ||
        (two_j + two_m) % 2 != 0)
        return 0.0;

    const int a = (two_j1 + two_j2 - two_j) / 2;
    const int b = (two_j1 - two_m1) / 2;
    const int c = (two_j2 + two_m2) / 2;
    const int d = (two_j - two_j2 + two_m1) / 2;
    const int e = (two_j - two_j1 - two_m2) / 2;

    const int k_min = std::max({0, -d, -e});
    const int k_max = std::min({a, b, c});
    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        sum += sign / (factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) * factorial(d + k) *
                       factorial(e + k));
    }

    const double triangle = factorial(a) * factorial((two_j1 - two_j2 + two_j) / 2) *
                            factorial((-two_j1 + two_j2 + two_j) / 2) /
                            factorial((two_j1 + two_j2 + two_j) / 2 + 1);
    const double projections = factorial((two_j1 + two_m1) / 2) * factorial(b) * factorial(c) *
                               factorial((two_j2 - two_m2) / 2) * factorial((two_j + two_m) / 2) *
                               factorial((two_j - two_m) / 2);
    return std::sqrt((two_j + 1) * triangle * projections) * sum;
}

inline double clebsch_gordan(double j1, double m1, double j2, double m2, double j, double m) {
    auto twice = [](double x) { return static_cast<int>(std::lround(2.0 * x)); };
    return clebsch_gordan_2(twice(j1), twice(m1), twice(j2), twice(m2), twice(j), twice(m));
}

// Hyperfine Lande factor with the nuclear contribution neglected.
inline double lande_gF(double J, double I, double F, double gJ) {
    const bool integral = std::abs(std::remainder(F - std::abs(J - I), 1.0)) < 1e-12;
    if (J < 0.0 || I < 0.0 || F < std::abs(J - I) - 1e-12 || F > J + I + 1e-12 || !integral)
        throw DomainError("invalid (J, I, F) combination");
    if (F == 0.0)
        return 0.0;
    return gJ * (F * (F + 1.0) + J * (J + 1.0) - I * (I + 1.0)) / (2.0 * F * (F + 1.0));
}

enum class Manifold { ground, excited };

struct Sublevel {
    Manifold manifold = Manifold::ground;
    int F = 0;
    int m = 0;
    double energy_shift = 0.0;  // rad/s
};

// Linear Zeeman shift m gF muB B in rad/s; B in tesla.
inline double zeeman_shift(const Sublevel& level, double gF, double B_z) {
    return units::two_pi * units::bohr_magneton_hz_per_tesla * B_z * gF * level.m;
}

struct Transition {
    int m_g = 0;
    int m_e = 0;
    int q = 0;
    double amplitude = 0.0;
};

struct TransitionTable {
    int F_g = 3;
    int F_e = 4;
    std::vector<Transition> entries;

    std::optional<Transition> find(int m_g, int m_e) const {
        for (const auto& t : entries)
            if (t.m_g == m_g && t.m_e == m_e)
                return t;
        return std::nullopt;
    }
};

inline constexpr int rb85_F_ground = 3;
inline constexpr int rb85_F_excited = 4;

// Relative dipole amplitude <F_g m_g; 1 q | F_e m_e> for the cycling line.
inline Transition dipole_amplitude(int m_g, int m_e, int F_g = rb85_F_ground, int F_e = rb85_F_excited) {
    if (std::abs(m_g) > F_g || std::abs(m_e) > F_e)
        throw DomainError("magnetic quantum number outside its manifold");
    const int q = m_e - m_g;
    if (std::abs(q) > 1)
        throw DomainError("dipole-forbidden transition: |m_e - m_g| > 1");
    return {m_g, m_e, q, clebsch_gordan_2(2 * F_g, 2 * m_g, 2, 2 * q, 2 * F_e, 2 * m_e)};
}

inline TransitionTable transition_table(int F_g = rb85_F_ground, int F_e = rb85_F_excited) {
    TransitionTable table{F_g, F_e, {}};
    for (int m_g = -F_g; m_g <= F_g; ++m_g)
        for (int q = -1; q <= 1; ++q) {
            const int m_e = m_g + q;
            if (std::abs(m_e) > F_e)
                continue;
            const Transition t = dipole_amplitude(m_g, m_e, F_g, F_e);
            if (t.amplitude != 0.0)
                table.entries.push_back(t);
        }
    return table;
}

// Lowering-operator coefficients |g><e| for one polarization q.
struct DecayChannel {
    int q = 0;
    double rate_prefactor = 0.0;  // collapse operator is sqrt(rate_prefactor) * sigma_q
    std::vector<Transition> terms;
};

// Every excited sublevel must have unit total strength unless `require_normalized`
// is false (pruned schemes drop some decay paths).
inline std::array<DecayChannel, 3> decay_channels(const TransitionTable& table, double gamma,
                                                  bool require_normalized = true, double tolerance = 1e-12) {
    if (!(gamma > 0.0))
        throw DomainError("atomic decay rate must be positive");
    std::map<int, double> total;
    for (const auto& t : table.entries)
        total[t.m_e] += t.amplitude * t.amplitude;
    if (require_normalized)
        for (const auto& [m_e, strength] : total)
            if (std::abs(strength - 1.0) > tolerance)
                throw ConsistencyError("transition table not normalized for m_e = " + std::to_string(m_e));

    std::array<DecayChannel, 3> channels;
    for (int q = -1; q <= 1; ++q) {
        channels[q + 1].q = q;
        channels[q + 1].rate_prefactor = 2.0 * gamma;
    }
    for (const auto& t : table.entries)
        channels[t.q + 1].terms.push_back(t);
    return channels;
}

// Fine-structure g-factors without QED and relativistic corrections.
inline constexpr double rb85_gJ_ground = 2.0;
inline constexpr double rb85_gJ_excited = 4.0 / 3.0;
inline constexpr double rb85_nuclear_spin = 2.5;
inline constexpr double rb_d2_linewidth_mhz = 6.07;  // Gamma / 2pi

struct AtomParams {
    double gamma = units::mhz_to_rad(rb_d2_linewidth_mhz) / 2.0;  // amplitude decay, Gamma = 2 gamma
    double gF_ground = lande_gF(0.5, rb85_nuclear_spin, 3.0, rb85_gJ_ground);
    double gF_excited = lande_gF(1.5, rb85_nuclear_spin, 4.0, rb85_gJ_excited);
    double B_z = 4.5 * units::gauss;
    bool zeeman = true;
};

// Sublevels plus transition table. Levels are ordered ground m = -F_g..F_g,
// then excited m = -F_e..F_e.
struct AtomModel {
    std::vector<Sublevel> levels;
    TransitionTable transitions;
    bool pruned = false;

    std::size_t size() const { return levels.size(); }

    std::optional<std::size_t> index_of(Manifold manifold, int m) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i].manifold == manifold && levels[i].m == m)
                return i;
        return std::nullopt;
    }

    std::size_t require_index(Manifold manifold, int m) const {
        if (auto i = index_of(manifold, m))
            return *i;
        throw DomainError("sublevel m = " + std::to_string(m) + " not present in the level scheme");
    }
};

inline AtomModel rb85_cycling_model(const AtomParams& p = {}) {
    AtomModel model;
    model.transitions = transition_table(rb85_F_ground, rb85_F_excited);
    const double b = p.zeeman ? p.B_z : 0.0;
    for (int m = -rb85_F_ground; m <= rb85_F_ground; ++m) {
        Sublevel s{Manifold::ground, rb85_F_ground, m, 0.0};
        s.energy_shift = zeeman_shift(s, p.gF_ground, b);
        model.levels.push_back(s);
    }
    for (int m = -rb85_F_excited; m <= rb85_F_excited; ++m) {
        Sublevel s{Manifold::excited, rb85_F_excited, m, 0.0};
        s.energy_shift = zeeman_shift(s, p.gF_excited, b);
        model.levels.push_back(s);
    }
    return model;
}

// Two-level atom driven on a single sigma_q transition with unit strength.
inline AtomModel two_level_model(int q = +1) {
    if (std::abs(q) > 1)
        throw DomainError("spherical index must be -1, 0 or +1");
    AtomModel model;
    model.levels = {{Manifold::ground, 0, 0, 0.0}, {Manifold::excited, 1, q, 0.0}};
    model.transitions.F_g = 0;
    model.transitions.F_e = 1;
    model.transitions.entries = {{0, q, q, 1.0}};
    return model;
}

// Keeps ground sublevels reachable from `initial_m` within `steps` cycles of
// excitation (on any of `active_q`) followed by spontaneous decay, and the
// excited sublevels reachable from them by one excitation. Decay paths into
// dropped sublevels are removed from the table.
inline AtomModel prune_levels(const AtomModel& full, int initial_m, const std::set<int>& active_q, int steps = 2) {
    std::set<int> ground{initial_m};
    std::set<int> excited;
    const auto& entries = full.transitions.entries;
    for (int s = 0; s < steps; ++s) {
        std::set<int> new_excited;
        for (const auto& t : entries)
            if (ground.count(t.m_g) && active_q.count(t.q))
                new_excited.insert(t.m_e);
        for (const auto& t : entries)
            if (new_excited.count(t.m_e))
                ground.insert(t.m_g);
        excited.insert(new_excited.begin(), new_excited.end());
    }
    for (const auto& t : entries)
        if (ground.count(t.m_g) && active_q.count(t.q))
            excited.insert(t.m_e);

    AtomModel pruned;
    pruned.pruned = true;
    pruned.transitions.F_g = full.transitions.F_g;
    pruned.transitions.F_e = full.transitions.F_e;
    for (const auto& level : full.levels) {
        const auto& keep = level.manifold == Manifold::ground ? ground : excited;
        if (keep.count(level.m))
            pruned.levels.push_back(level);
    }
    for (const auto& t : entries)
        if (ground.count(t.m_g) && excited.count(t.m_e))
            pruned.transitions.entries.push_back(t);
    return pruned;
}

}  // namespace wgm::atom
