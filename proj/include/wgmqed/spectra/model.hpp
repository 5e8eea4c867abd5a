// model.hpp - probe geometries and fibre transmission of the atom-resonator system
//
// Mode a is the "+" propagation sense (TM+ / TE+), mode b the "-" sense. The
// detection laser always drives mode a; counter-propagating geometries probe
// mode b after the atom was prepared by the detection light.

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wgmqed/atom.hpp"
#include "wgmqed/errors.hpp"
#include "wgmqed/fields.hpp"
#include "wgmqed/quantum.hpp"
#include "wgmqed/units.hpp"

namespace wgm::spectra {

using cplx = std::complex<double>;

enum class Geometry { co_TM, co_TE, counter_TM, counter_TE, empty, legacy };

inline std::string to_string(Geometry g) {
    switch (g) {
        case Geometry::co_TM: return "co_TM";
        case Geometry::co_TE: return "co_TE";
        case Geometry::counter_TM: return "counter_TM";
        case Geometry::counter_TE: return "counter_TE";
        case Geometry::empty: return "empty";
        case Geometry::legacy: return "legacy";
    }
    return "unknown";
}

inline Geometry geometry_from_string(const std::string& s) {
    for (Geometry g : {Geometry::co_TM, Geometry::co_TE, Geometry::counter_TM, Geometry::counter_TE, Geometry::empty,
                       Geometry::legacy})
        if (to_string(g) == s)
            return g;
    throw DomainError("unknown geometry '" + s + "'");
}

inline bool is_tm(Geometry g) { return g == Geometry::co_TM || g == Geometry::counter_TM; }
inline bool is_counter(Geometry g) { return g == Geometry::counter_TM || g == Geometry::counter_TE; }

// Input flux used by the real-time detection ("1.2e7 photons/s").
inline constexpr double experimental_photon_flux = 1.2e7;
// Probe flux deep in the linear-response regime (~1e-8 intracavity photons).
inline constexpr double weak_photon_flux = 1.0;

// Physical parameters shared by every spectrum of one resonator mode.
struct ModelConfig {
    double kappa0 = units::mhz_to_rad(5.0);
    double kappa_ext = units::mhz_to_rad(5.0);
    atom::AtomParams atom;
    double refractive_index = fields::silica_index;
    double delta_ca = 0.0;
    double photon_flux = experimental_photon_flux;  // alpha_in^2
    double azimuth_phase = 0.0;
    double backscatter = 0.0;
    int cutoff_a = 1;
    int cutoff_b = 1;
    bool prune_levels = false;
    // Replace the Zeeman manifold by the geometry's dominant transition alone
    // (unit strength): a two-level atom for checks against closed forms.
    bool two_level = false;
    std::size_t dimension_budget = quantum::default_dimension_budget;

    double kappa_tot() const { return kappa0 + kappa_ext; }
};

// Everything a geometry fixes: mode polarizations, driven mode, the transition
// the resonator is tuned to, and the optically pumped initial sublevel.
struct GeometrySetup {
    Geometry geometry = Geometry::co_TM;
    fields::ModePolarization pol_a;
    fields::ModePolarization pol_b;
    quantum::DrivenMode drive = quantum::DrivenMode::a;
    int reference_m_g = 3;
    int reference_m_e = 4;
    int initial_m = 3;
};

inline GeometrySetup setup_geometry(Geometry g, const ModelConfig& cfg) {
    if (g == Geometry::legacy)
        throw DomainError("the legacy model has no quantum geometry; use legacy_standing_wave_spectrum");
    GeometrySetup s;
    s.geometry = g;
    if (g == Geometry::co_TE || g == Geometry::counter_TE) {
        s.pol_a = fields::ModePolarization::te(fields::Sense::plus);
        s.pol_b = fields::ModePolarization::te(fields::Sense::minus);
        s.reference_m_g = 0;
        s.reference_m_e = 0;
        s.initial_m = 0;
    } else {
        const double r = fields::longitudinal_ratio(fields::RefractiveRatio::from_indices(cfg.refractive_index, 1.0));
        s.pol_a = fields::ModePolarization::tm(r, fields::Sense::plus);
        s.pol_b = fields::ModePolarization::tm(r, fields::Sense::minus);
    }
    s.drive = is_counter(g) ? quantum::DrivenMode::b : quantum::DrivenMode::a;
    return s;
}

// Closed-form empty-resonator transmission.
inline double empty_cavity_transmission(double delta, double kappa0, double kappa_ext) {
    if (!(kappa0 > 0.0) || kappa_ext < 0.0)
        throw DomainError("resonator decay rates must be positive");
    const double k = kappa0 + kappa_ext;
    const double d = kappa0 - kappa_ext;
    return (d * d + delta * delta) / (k * k + delta * delta);
}

// Linear-response transmission amplitude of a resonator coupled with strength
// g to a two-level atom: t = 1 - 2 kappa_ext / (kappa + i delta + g^2/(gamma + i delta_as)).
inline cplx two_level_amplitude(double delta, double g, double kappa0, double kappa_ext, double gamma,
                                double delta_ca = 0.0) {
    const cplx i_unit(0.0, 1.0);
    const cplx atom_term = g * g / (gamma + i_unit * (delta - delta_ca));
    return 1.0 - 2.0 * kappa_ext / (kappa0 + kappa_ext + i_unit * delta + atom_term);
}

// T = |alpha_out / alpha_in|^2 with alpha_out = alpha_in - i sqrt(2 kappa_ext) <d>.
inline double transmission_from_state(const quantum::DensityOperator& rho, const quantum::Operators& ops,
                                      const quantum::SystemParams& p) {
    if (p.alpha_in == 0.0)
        throw DomainError("transmission is undefined without a probe drive");
    const auto& d = p.drive_mode == quantum::DrivenMode::a ? ops.a : ops.b;
    const cplx field = quantum::expectation(d, rho);
    const cplx out = p.alpha_in - cplx(0.0, 1.0) * std::sqrt(2.0 * p.kappa_ext) * field;
    return std::norm(out / p.alpha_in);
}

// Atom-resonator system of one geometry with the operator set built once;
// steady states for varying detuning and coupling reuse the same solver.
class SpectrumModel {
  public:
    SpectrumModel(Geometry geometry, const ModelConfig& cfg)
        : cfg_(cfg), setup_(setup_geometry(geometry, cfg)), full_atom_(atom::rb85_cycling_model(cfg.atom)) {
        if (cfg.two_level) {
            const int q = is_tm(geometry) || geometry == Geometry::empty ? +1 : 0;
            full_atom_ = atom::two_level_model(q);
            setup_.reference_m_g = 0;
            setup_.reference_m_e = q;
            setup_.initial_m = 0;
        }
        atom::AtomModel model = full_atom_;
        if (cfg.prune_levels && !cfg.two_level) {
            std::set<int> active;
            for (const auto* pol : {&setup_.pol_a, &setup_.pol_b}) {
                const auto u = fields::mode_couplings(*pol);
                for (int q = -1; q <= 1; ++q)
                    if (std::norm(u[q + 1]) > 1e-12)
                        active.insert(q);
            }
            model = atom::prune_levels(full_atom_, setup_.initial_m, active, 2);
        }
        space_ = quantum::build_space(std::move(model), cfg.cutoff_a, cfg.cutoff_b, cfg.dimension_budget);
        ops_ = quantum::build_operators(space_);

        // g = 0: the atom decouples and its internal state is arbitrary, so
        // the resonator is solved with a single inert ground level instead.
        atom::AtomModel inert;
        inert.levels = {full_atom_.levels[full_atom_.require_index(atom::Manifold::ground, setup_.initial_m)]};
        inert.transitions.entries.clear();
        inert.pruned = true;
        empty_space_ = quantum::build_space(std::move(inert), cfg.cutoff_a, cfg.cutoff_b, cfg.dimension_budget);
        empty_ops_ = quantum::build_operators(empty_space_);
    }

    const GeometrySetup& setup() const { return setup_; }
    const ModelConfig& config() const { return cfg_; }
    const quantum::CompositeSpace& space() const { return space_; }
    const quantum::Operators& operators() const { return ops_; }

    quantum::SystemParams params(double delta_cs, double g0) const {
        quantum::SystemParams p;
        p.g0 = g0;
        p.kappa0 = cfg_.kappa0;
        p.kappa_ext = cfg_.kappa_ext;
        p.gamma = cfg_.atom.gamma;
        p.delta_cs = delta_cs;
        p.delta_ca = cfg_.delta_ca;
        p.drive_mode = setup_.drive;
        p.alpha_in = std::sqrt(cfg_.photon_flux);
        p.set_polarizations(setup_.pol_a, setup_.pol_b);
        p.azimuth_phase = cfg_.azimuth_phase;
        p.line_offset = quantum::transition_shift(full_atom_, setup_.reference_m_g, setup_.reference_m_e);
        p.backscatter = cfg_.backscatter;
        return p;
    }

    // The space actually used for parameters p (the inert one when g0 = 0).
    const quantum::CompositeSpace& space_for(const quantum::SystemParams& p) const {
        return p.g0 == 0.0 ? empty_space_ : space_;
    }
    const quantum::Operators& operators_for(const quantum::SystemParams& p) const {
        return p.g0 == 0.0 ? empty_ops_ : ops_;
    }

    quantum::Liouvillian liouvillian(const quantum::SystemParams& p) const {
        const auto H = quantum::build_hamiltonian(space_for(p), operators_for(p), p);
        return quantum::build_liouvillian(space_for(p), operators_for(p), H, p);
    }

    quantum::DensityOperator steady_state(const quantum::SystemParams& p) {
        auto& solver = p.g0 == 0.0 ? empty_solver_ : solver_;
        return solver.solve(liouvillian(p));
    }

    double transmission(const quantum::DensityOperator& rho, const quantum::SystemParams& p) const {
        return transmission_from_state(rho, operators_for(p), p);
    }

    // Steady-state (cw) transmission at resonator-probe detuning delta_cs.
    double steady_transmission(double delta_cs, double g0) {
        const auto p = params(delta_cs, g0);
        return transmission(steady_state(p), p);
    }

  private:
    ModelConfig cfg_;
    GeometrySetup setup_;
    atom::AtomModel full_atom_;
    quantum::CompositeSpace space_;
    quantum::Operators ops_;
    quantum::CompositeSpace empty_space_;
    quantum::Operators empty_ops_;
    quantum::SteadyStateSolver solver_;
    quantum::SteadyStateSolver empty_solver_;
};

}  // namespace wgm::spectra
