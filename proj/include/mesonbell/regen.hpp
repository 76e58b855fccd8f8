#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mesonbell/pair.hpp"

namespace mesonbell {

/// Thin homogeneous regenerator. All quantities are expressed in the
/// library's natural units (lengths in c*tau_S, momenta and masses in
/// 1/(c*tau_S)); the regeneration parameter itself is scale invariant,
/// only the crossing time depends on the unit choice.
struct RegeneratorSpec {
    complex f{0.0, 0.0};     // K0-nucleus forward scattering amplitude
    complex fbar{0.0, 0.0};  // K0bar-nucleus forward scattering amplitude
    double nu = 0.0;         // scattering-center density
    double d = 0.0;          // slab thickness
    double p_K = 1.0;        // kaon momentum
    double m_K = 1.0;        // average neutral kaon mass

    /// Proper time spent crossing the slab, in tau_S units.
    double crossing_time() const { return d * m_K / p_K; }

    void validate() const {
        if (!(d >= 0.0)) throw std::invalid_argument("RegeneratorSpec: d >= 0 required");
        if (!(nu >= 0.0)) throw std::invalid_argument("RegeneratorSpec: nu >= 0 required");
        if (!(p_K > 0.0) || !(m_K > 0.0))
            throw std::invalid_argument("RegeneratorSpec: p_K, m_K must be > 0");
    }
};

struct thin_regenerator_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// r = i pi nu (f - fbar) d / p_K. Valid only in the thin-slab regime,
/// enforced as crossing_time < 0.1 tau_S.
inline complex regeneration_parameter(const RegeneratorSpec& spec) {
    spec.validate();
    const double dt = spec.crossing_time();
    if (!(dt < 0.1))
        throw thin_regenerator_violation(
            "regeneration_parameter: crossing time " + std::to_string(dt) +
            " tau_S violates the thin-regenerator condition (< 0.1 tau_S)");
    const complex i{0.0, 1.0};
    return i * M_PI * spec.nu / spec.p_K * (spec.f - spec.fbar) * spec.d;
}

/// R = -r exp(-i (dm - i dGamma/2) T). |R| grows with the free flight T
/// because dGamma < 0: the K_S K_L components die off faster than K_L K_L.
inline complex effective_R(complex r, double T, const MesonParams& p) {
    if (!(T >= 0.0)) throw std::domain_error("effective_R: T must be >= 0");
    const complex i{0.0, 1.0};
    const complex exponent = -i * complex{p.delta_m, -0.5 * p.delta_gamma()} * T;
    return -r * std::exp(exponent);
}

/// Survivor-renormalized state behind the regenerator, in the lifetime
/// basis: coefficients (1, -1, R)/sqrt(2+|R|^2) on the (K_S K_L, K_L K_S,
/// K_L K_L) slots. R = -1 is Hardy's state.
inline PairState hardy_state(complex R) {
    PairState s;
    s.basis_l = Basis::Lifetime;
    s.basis_r = Basis::Lifetime;
    const double n = 1.0 / std::sqrt(2.0 + std::norm(R));
    s.coeffs[0][0] = complex{0.0, 0.0};
    s.coeffs[0][1] = complex{n, 0.0};
    s.coeffs[1][0] = complex{-n, 0.0};
    s.coeffs[1][1] = R * n;
    s.norm_note = NormNote::RenormalizedToSurvivors;
    return s;
}

struct HardyPrep {
    complex R{0.0, 0.0};
    double T = 0.0;
    PairState state;
};

inline HardyPrep hardy_prep(complex R, double T) {
    return {R, T, hardy_state(R)};
}

struct HardyPreparationSolution {
    double T = 0.0;          // flight time at which |R(T)| = 1
    complex R{0.0, 0.0};     // the resulting R
    double phase_residual = 0.0;  // arg(R) - pi, wrapped to (-pi, pi]
};

/// Solve |R(T)| = 1 for T given r, by logarithm: |R(T)| = |r| e^{-dGamma T/2}.
/// The phase of R(T) is whatever the flight time produces; the residual
/// against the R = -1 target is reported, not corrected.
inline HardyPreparationSolution hardy_preparation_time(complex r, const MesonParams& p) {
    const double abs_r = std::abs(r);
    if (!(abs_r > 0.0))
        throw std::domain_error("hardy_preparation_time: |r| must be > 0");
    if (!(p.delta_gamma() < 0.0))
        throw std::domain_error("hardy_preparation_time: requires dGamma < 0");
    const double T = 2.0 * std::log(abs_r) / p.delta_gamma();
    if (!(T >= 0.0))
        throw std::domain_error(
            "hardy_preparation_time: |r| >= 1 already at the regenerator exit");
    const complex R = effective_R(r, T, p);
    double residual = std::arg(R) - M_PI;
    while (residual <= -M_PI) residual += 2.0 * M_PI;
    while (residual > M_PI) residual -= 2.0 * M_PI;
    return {T, R, residual};
}

/// Earliest common flight time guaranteeing space-like separation between
/// the two measurements when the lifetime window Delta-tau follows:
/// T_min = (1/beta - 1) dtau / 2.
inline double min_separation_time(double delta_tau, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::invalid_argument("min_separation_time: require 0 < beta < 1");
    if (!(delta_tau > 0.0))
        throw std::invalid_argument("min_separation_time: require delta_tau > 0");
    return (1.0 / beta - 1.0) * delta_tau / 2.0;
}

} // namespace mesonbell
