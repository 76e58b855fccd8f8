#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mesonbell {

using complex = std::complex<double>;

/// polar() taking the phase in degrees, exact at the cardinal angles so
/// that inputs like 180 deg produce a real -1 rather than -1 + 1e-16 i.
inline complex polar_deg(double magnitude, double degrees) {
    double d = std::fmod(degrees, 360.0);
    if (d < 0.0) d += 360.0;
    if (d == 0.0) return {magnitude, 0.0};
    if (d == 90.0) return {0.0, magnitude};
    if (d == 180.0) return {-magnitude, 0.0};
    if (d == 270.0) return {0.0, -magnitude};
    return std::polar(magnitude, d * M_PI / 180.0);
}

enum class Species { Kaon, BMeson };

inline std::string to_string(Species s) {
    return s == Species::Kaon ? "kaon" : "bmeson";
}

/// Decay-channel branching ratios entering the lifetime-identification
/// schemes. Semileptonic modes tag flavour, pi-pi modes tag the short-lived
/// state. Unused (all zero) for B mesons, where every channel tags flavour.
struct BranchingRatios {
    double kl_pilnu = 0.0;  // BR(K_L -> pi l nu)
    double kl_pipi  = 0.0;  // BR(K_L -> pi pi)
    double ks_pilnu = 0.0;  // BR(K_S -> pi l nu)
    double ks_pipi  = 0.0;  // BR(K_S -> pi pi)
};

/// Species constants in natural units: the short-lived width and lifetime
/// set the scale (gamma_S = 1, tau_S = 1 for kaons; Gamma_B = 1 for B
/// mesons), hbar = c = 1. Every derived quantity below is a ratio, so no
/// SI bookkeeping is needed anywhere in the library.
///
/// The mean-mass global phase is fixed to zero: propagation phases use
/// m_S = -delta_m/2 and m_L = +delta_m/2, which leaves only the observable
/// mass splitting in any probability.
struct MesonParams {
    Species species = Species::Kaon;
    double gamma_S = 1.0;   // width of K_S (or B_L == B_H for B mesons)
    double gamma_L = 1.0;   // width of K_L
    double delta_m = 0.0;   // m_L - m_S (kaon), m_H - m_L (B), > 0
    complex epsilon{0.0, 0.0};
    BranchingRatios br;
    double beta = 0.22;     // meson velocity in units of c

    double gamma_mean() const { return 0.5 * (gamma_S + gamma_L); }
    /// Paper convention: delta_gamma = Gamma_L - Gamma_S (negative for kaons).
    double delta_gamma() const { return gamma_L - gamma_S; }

    /// Complex lifetime-basis eigenvalues lambda = m - i*Gamma/2 with the
    /// mean mass removed.
    complex lambda_S() const { return {-0.5 * delta_m, -0.5 * gamma_S}; }
    complex lambda_L() const { return {+0.5 * delta_m, -0.5 * gamma_L}; }

    void validate() const {
        if (!(gamma_S >= gamma_L) || !(gamma_L >= 0.0))
            throw std::invalid_argument("MesonParams: require gamma_S >= gamma_L >= 0");
        if (!(delta_m > 0.0))
            throw std::invalid_argument("MesonParams: require delta_m > 0");
        if (!(std::abs(epsilon) < 1.0))
            throw std::invalid_argument("MesonParams: require |epsilon| < 1");
    }

    /// Kaon defaults. Gamma_S/Gamma_L = 579, |dGamma| = 2.1 dm (so
    /// dm = (Gamma_S - Gamma_L)/2.1 ~ 0.4754), |eps| = 2.284e-3. The phase
    /// of eps is not measured independently here; we adopt the superweak
    /// direction atan(2 dm / |dGamma|) = atan(2/2.1) as the documented
    /// convention.
    static MesonParams kaon_defaults() {
        MesonParams p;
        p.species = Species::Kaon;
        p.gamma_S = 1.0;
        p.gamma_L = 1.0 / 579.0;
        p.delta_m = (p.gamma_S - p.gamma_L) / 2.1;
        const double eps_abs = 2.284e-3;
        const double eps_phase = std::atan2(2.0 * p.delta_m, p.gamma_S - p.gamma_L);
        p.epsilon = std::polar(eps_abs, eps_phase);
        p.br = BranchingRatios{0.6600, 0.0030, 0.0011, 0.9989};
        p.beta = 0.22;
        return p;
    }

    /// B-meson parameters: equal widths Gamma_B = 1, epsilon_B = 0. The
    /// mass splitting cannot be fixed from width ratios (|dGamma_B| is
    /// compatible with zero), so it is a required input for every B run.
    static MesonParams b_defaults(double delta_m_b) {
        if (!(delta_m_b > 0.0))
            throw std::invalid_argument("b_defaults: delta_m_b must be > 0");
        MesonParams p;
        p.species = Species::BMeson;
        p.gamma_S = 1.0;
        p.gamma_L = 1.0;
        p.delta_m = delta_m_b;
        p.epsilon = complex{0.0, 0.0};
        p.br = BranchingRatios{};
        p.beta = 0.5;  // production dependent; override per setup
        return p;
    }

    static MesonParams defaults(Species s, double delta_m_b = 0.0) {
        if (s == Species::Kaon) return kaon_defaults();
        return b_defaults(delta_m_b);
    }
};

} // namespace mesonbell
