#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "mesonbell/params.hpp"
#include "mesonbell/state.hpp"

namespace mesonbell {

enum class NormNote { PhysicalUnnormalized, RenormalizedToSurvivors };

/// Two-meson state as an unnormalized 2x2 complex coefficient matrix over
/// a declared (left basis x right basis) pair. Row index = left outcome,
/// column index = right outcome, both in the repo-wide basis ordering.
struct PairState {
    Basis basis_l = Basis::Strangeness;
    Basis basis_r = Basis::Strangeness;
    std::array<std::array<complex, 2>, 2> coeffs{};
    NormNote norm_note = NormNote::PhysicalUnnormalized;

    double norm2() const {
        double s = 0.0;
        for (const auto& row : coeffs)
            for (const auto& c : row) s += std::norm(c);
        return s;
    }
};

namespace detail {

inline PairState pair_change_basis(const PairState& s, Basis target_l, Basis target_r,
                                   complex eps) {
    const Mat2 ml = basis_matrix(s.basis_l, target_l, eps);
    const Mat2 mr = basis_matrix(s.basis_r, target_r, eps);
    // coeffs' = M_l * coeffs * M_r^T (each side transforms as an amplitude vector)
    PairState out;
    out.basis_l = target_l;
    out.basis_r = target_r;
    out.norm_note = s.norm_note;
    const auto& c = s.coeffs;
    std::array<std::array<complex, 2>, 2> t{};
    t[0][0] = ml.a * c[0][0] + ml.b * c[1][0];
    t[0][1] = ml.a * c[0][1] + ml.b * c[1][1];
    t[1][0] = ml.c * c[0][0] + ml.d * c[1][0];
    t[1][1] = ml.c * c[0][1] + ml.d * c[1][1];
    out.coeffs[0][0] = t[0][0] * mr.a + t[0][1] * mr.b;
    out.coeffs[0][1] = t[0][0] * mr.c + t[0][1] * mr.d;
    out.coeffs[1][0] = t[1][0] * mr.a + t[1][1] * mr.b;
    out.coeffs[1][1] = t[1][0] * mr.c + t[1][1] * mr.d;
    return out;
}

} // namespace detail

inline PairState pair_change_basis(const PairState& s, Basis target_l, Basis target_r,
                                   complex eps) {
    if (!(std::abs(eps) < 1.0))
        throw std::invalid_argument("pair_change_basis: require |eps| < 1");
    return detail::pair_change_basis(s, target_l, target_r, eps);
}

/// The J^PC = 1-- state at creation, in the strangeness basis:
///   (1/sqrt2) [ |K0>|K0bar> - |K0bar>|K0> ].
/// Antisymmetric and maximally entangled; its lifetime-basis form carries
/// the (1+|eps|^2)/(1-eps^2) prefactor when eps != 0.
inline PairState initial_pair(const MesonParams& p) {
    PairState s;
    s.basis_l = Basis::Strangeness;
    s.basis_r = Basis::Strangeness;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    s.coeffs[0][1] = complex{inv_sqrt2, 0.0};
    s.coeffs[1][0] = complex{-inv_sqrt2, 0.0};
    s.norm_note = NormNote::PhysicalUnnormalized;
    (void)p;
    return s;
}

/// Two-time evolution: each lifetime-basis coefficient is multiplied by the
/// single-side propagation factors. CP violation is neglected here (the
/// eps = 0 basis change is used when converting), matching the two-time
/// entangled-state expressions this reproduces.
inline PairState evolve_pair(const PairState& s, double tau_l, double tau_r,
                             const MesonParams& p) {
    if (!(tau_l >= 0.0) || !(tau_r >= 0.0))
        throw std::domain_error("evolve_pair: times must be >= 0");
    const complex eps0{0.0, 0.0};
    PairState lt = detail::pair_change_basis(s, Basis::Lifetime, Basis::Lifetime, eps0);
    const complex i{0.0, 1.0};
    const complex fl[2] = {std::exp(-i * p.lambda_S() * tau_l), std::exp(-i * p.lambda_L() * tau_l)};
    const complex fr[2] = {std::exp(-i * p.lambda_S() * tau_r), std::exp(-i * p.lambda_L() * tau_r)};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) lt.coeffs[a][b] *= fl[a] * fr[b];
    return detail::pair_change_basis(lt, s.basis_l, s.basis_r, eps0);
}

namespace detail {

inline std::array<complex, 2> tag_bra_components(StateTag t, Basis basis) {
    // Bra components in the given basis at eps = 0.
    const double r = 1.0 / std::sqrt(2.0);
    switch (basis) {
        case Basis::Strangeness:
            switch (t) {
                case StateTag::K0: return {complex{1.0}, complex{0.0}};
                case StateTag::K0bar: return {complex{0.0}, complex{1.0}};
                case StateTag::KS: return {complex{r}, complex{r}};
                case StateTag::KL: return {complex{r}, complex{-r}};
            }
            break;
        case Basis::Lifetime:
            switch (t) {
                case StateTag::K0: return {complex{r}, complex{r}};
                case StateTag::K0bar: return {complex{r}, complex{-r}};
                case StateTag::KS: return {complex{1.0}, complex{0.0}};
                case StateTag::KL: return {complex{0.0}, complex{1.0}};
            }
            break;
        default:
            break;
    }
    throw std::invalid_argument("tag_bra_components: unsupported basis");
}

} // namespace detail

/// <tag_l tag_r | s> for a pair state, at eps = 0.
inline complex joint_amplitude(const PairState& s, StateTag tag_l, StateTag tag_r) {
    const auto bl = detail::tag_bra_components(tag_l, s.basis_l);
    const auto br = detail::tag_bra_components(tag_r, s.basis_r);
    complex a{0.0, 0.0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            a += std::conj(bl[i]) * s.coeffs[i][j] * std::conj(br[j]);
    return a;
}

namespace detail {

inline bool is_flavour(StateTag t) { return t == StateTag::K0 || t == StateTag::K0bar; }

/// Same/opposite-flavour joint detection probabilities for the evolved
/// singlet (closed forms; eps = 0).
inline double joint_flavour_closed_form(StateTag l, StateTag r, double tau_l, double tau_r,
                                        const MesonParams& p) {
    const double envelope =
        0.125 * (std::exp(-(p.gamma_L * tau_l + p.gamma_S * tau_r)) +
                 std::exp(-(p.gamma_S * tau_l + p.gamma_L * tau_r)));
    const double dt = tau_l - tau_r;
    const double osc = std::cos(p.delta_m * dt) / std::cosh(0.5 * p.delta_gamma() * dt);
    return envelope * (l == r ? 1.0 - osc : 1.0 + osc);
}

} // namespace detail

/// Joint detection probability for outcomes at proper times (tau_l, tau_r)
/// on the evolved creation-state pair. Strangeness x strangeness and
/// lifetime x lifetime use the closed forms; mixed bases are computed from
/// the evolved amplitudes (there is no published closed form to cite, so
/// the amplitude route is the definition).
inline double joint_probability(StateTag obs_l, double tau_l, StateTag obs_r, double tau_r,
                                const MesonParams& p) {
    if (!(tau_l >= 0.0) || !(tau_r >= 0.0))
        throw std::domain_error("joint_probability: times must be >= 0");
    const bool fl = detail::is_flavour(obs_l);
    const bool fr = detail::is_flavour(obs_r);
    if (fl && fr) return detail::joint_flavour_closed_form(obs_l, obs_r, tau_l, tau_r, p);
    if (!fl && !fr) {
        // squared coefficients of the lifetime-basis evolved state
        const double env = 0.5 * std::exp(-(p.gamma_L * tau_l + p.gamma_S * tau_r));
        if (obs_l == StateTag::KL && obs_r == StateTag::KS) return env;
        if (obs_l == StateTag::KS && obs_r == StateTag::KL)
            return env * std::exp(p.delta_gamma() * (tau_l - tau_r));
        return 0.0;  // KS,KS and KL,KL are absent from the evolved singlet
    }
    PairState evolved = evolve_pair(initial_pair(p), tau_l, tau_r, p);
    evolved = pair_change_basis(evolved, fl ? Basis::Strangeness : Basis::Lifetime,
                                fr ? Basis::Strangeness : Basis::Lifetime, complex{0.0});
    return std::norm(joint_amplitude(evolved, obs_l, obs_r));
}

/// Same/opposite-beauty joint probabilities for B0 B0bar pairs:
///   (1/4) exp(-(tau_l + tau_r) Gamma_B) { 1 -+ cos[dm_B (tau_l - tau_r)] }.
inline double joint_probability_beauty(StateTag flav_l, double tau_l, StateTag flav_r,
                                       double tau_r, const MesonParams& p) {
    if (p.species != Species::BMeson)
        throw std::invalid_argument("joint_probability_beauty: params must be BMeson");
    if (!detail::is_flavour(flav_l) || !detail::is_flavour(flav_r))
        throw std::invalid_argument("joint_probability_beauty: flavour tags required");
    if (!(tau_l >= 0.0) || !(tau_r >= 0.0))
        throw std::domain_error("joint_probability_beauty: times must be >= 0");
    const double env = 0.25 * std::exp(-(tau_l + tau_r) * p.gamma_mean());
    const double c = std::cos(p.delta_m * (tau_l - tau_r));
    return env * (flav_l == flav_r ? 1.0 - c : 1.0 + c);
}

} // namespace mesonbell
