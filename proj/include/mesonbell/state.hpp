#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "mesonbell/params.hpp"

namespace mesonbell {

/// Basis ordering convention, fixed repo-wide:
///   Strangeness: (K0, K0bar)   Lifetime: (K_S, K_L)   CP: (K1, K2)
/// All sign checks in the pair states reference this ordering.
enum class Basis { Strangeness, Lifetime, CP };

inline std::string to_string(Basis b) {
    switch (b) {
        case Basis::Strangeness: return "strangeness";
        case Basis::Lifetime: return "lifetime";
        default: return "cp";
    }
}

/// One neutral meson as two complex amplitudes over a declared basis.
/// May be unnormalized: weak decays deplete the norm under propagation.
struct SingleState {
    Basis basis = Basis::Strangeness;
    std::array<complex, 2> amps{complex{0.0}, complex{0.0}};

    double norm2() const {
        return std::norm(amps[0]) + std::norm(amps[1]);
    }

    static SingleState k0()    { return {Basis::Strangeness, {complex{1.0}, complex{0.0}}}; }
    static SingleState k0bar() { return {Basis::Strangeness, {complex{0.0}, complex{1.0}}}; }
    static SingleState ks()    { return {Basis::Lifetime, {complex{1.0}, complex{0.0}}}; }
    static SingleState kl()    { return {Basis::Lifetime, {complex{0.0}, complex{1.0}}}; }
    static SingleState k1()    { return {Basis::CP, {complex{1.0}, complex{0.0}}}; }
    static SingleState k2()    { return {Basis::CP, {complex{0.0}, complex{1.0}}}; }
};

namespace detail {

/// 2x2 complex matrix acting on amplitude column vectors.
struct Mat2 {
    complex a, b, c, d;  // [[a, b], [c, d]]

    std::array<complex, 2> apply(const std::array<complex, 2>& v) const {
        return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
    }
    Mat2 mul(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

/// Columns express the lifetime kets in flavour components:
///   K_S = N[(1+eps) K0 + (1-eps) K0bar],  K_L = N[(1+eps) K0 - (1-eps) K0bar]
/// with N = 1/sqrt(2(1+|eps|^2)). Non-unitary for eps != 0.
inline Mat2 lifetime_to_strangeness(complex eps) {
    const double n = 1.0 / std::sqrt(2.0 * (1.0 + std::norm(eps)));
    return {n * (1.0 + eps), n * (1.0 + eps),
            n * (1.0 - eps), -n * (1.0 - eps)};
}

inline Mat2 strangeness_to_lifetime(complex eps) {
    const Mat2 m = lifetime_to_strangeness(eps);
    const complex det = m.a * m.d - m.b * m.c;
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

/// K_S = (K1 + eps K2)/sqrt(1+|eps|^2),  K_L = (K2 + eps K1)/sqrt(1+|eps|^2).
inline Mat2 lifetime_to_cp(complex eps) {
    const double n = 1.0 / std::sqrt(1.0 + std::norm(eps));
    return {n * 1.0, n * eps, n * eps, n * 1.0};
}

inline Mat2 cp_to_lifetime(complex eps) {
    const Mat2 m = lifetime_to_cp(eps);
    const complex det = m.a * m.d - m.b * m.c;
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

/// Change-of-basis matrix mapping amplitudes in `from` to amplitudes in `to`.
inline Mat2 basis_matrix(Basis from, Basis to, complex eps) {
    if (from == to) return {1.0, 0.0, 0.0, 1.0};
    if (from == Basis::Lifetime && to == Basis::Strangeness) return lifetime_to_strangeness(eps);
    if (from == Basis::Strangeness && to == Basis::Lifetime) return strangeness_to_lifetime(eps);
    if (from == Basis::Lifetime && to == Basis::CP) return lifetime_to_cp(eps);
    if (from == Basis::CP && to == Basis::Lifetime) return cp_to_lifetime(eps);
    if (from == Basis::Strangeness && to == Basis::CP)
        return lifetime_to_cp(eps).mul(strangeness_to_lifetime(eps));
    if (from == Basis::CP && to == Basis::Strangeness)
        return lifetime_to_strangeness(eps).mul(cp_to_lifetime(eps));
    throw std::invalid_argument("change_basis: unsupported basis pair " +
                                to_string(from) + " -> " + to_string(to));
}

} // namespace detail

inline SingleState change_basis(const SingleState& s, Basis target, complex eps) {
    if (!(std::abs(eps) < 1.0))
        throw std::invalid_argument("change_basis: require |eps| < 1");
    if (s.basis == target) return s;
    return {target, detail::basis_matrix(s.basis, target, eps).apply(s.amps)};
}

/// Free propagation by proper time tau in the lifetime basis: each
/// amplitude picks up exp(-i m tau) exp(-Gamma tau / 2). The caller
/// converts to the lifetime basis first.
inline SingleState propagate(const SingleState& s, double tau, const MesonParams& p) {
    if (s.basis != Basis::Lifetime)
        throw std::invalid_argument("propagate: state must be in the lifetime basis");
    if (!(tau >= 0.0))
        throw std::domain_error("propagate: tau must be >= 0");
    const complex i{0.0, 1.0};
    return {Basis::Lifetime,
            {s.amps[0] * std::exp(-i * p.lambda_S() * tau),
             s.amps[1] * std::exp(-i * p.lambda_L() * tau)}};
}

/// <a|b> with both states reduced to the (orthonormal) strangeness basis.
inline complex overlap(const SingleState& a, const SingleState& b, complex eps) {
    const auto af = change_basis(a, Basis::Strangeness, eps).amps;
    const auto bf = change_basis(b, Basis::Strangeness, eps).amps;
    return std::conj(af[0]) * bf[0] + std::conj(af[1]) * bf[1];
}

enum class StateTag { K0, K0bar, KS, KL };

inline std::string to_string(StateTag t) {
    switch (t) {
        case StateTag::K0: return "K0";
        case StateTag::K0bar: return "K0bar";
        case StateTag::KS: return "KS";
        default: return "KL";
    }
}

/// Closed-form single-meson transition probabilities at eps = 0.
/// Flavour-conjugate initial states follow by K0 <-> K0bar exchange,
/// exact in this eps = 0 treatment.
inline double transition_probability(StateTag initial, StateTag final, double tau,
                                     const MesonParams& p) {
    if (initial != StateTag::K0 && initial != StateTag::K0bar)
        throw std::invalid_argument("transition_probability: initial must be K0 or K0bar");
    if (!(tau >= 0.0))
        throw std::domain_error("transition_probability: tau must be >= 0");

    if (final == StateTag::KS) return 0.5 * std::exp(-p.gamma_S * tau);
    if (final == StateTag::KL) return 0.5 * std::exp(-p.gamma_L * tau);

    const double envelope = 0.25 * (std::exp(-p.gamma_S * tau) + std::exp(-p.gamma_L * tau));
    const double osc = std::cos(p.delta_m * tau) / std::cosh(0.5 * p.delta_gamma() * tau);
    const bool same_flavour = (initial == final);
    return envelope * (same_flavour ? 1.0 + osc : 1.0 - osc);
}

} // namespace mesonbell
