#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include "mesonbell/params.hpp"
#include "mesonbell/quadrature.hpp"
#include "mesonbell/regen.hpp"

namespace mesonbell {

enum class IdentScheme { WindowOnly, WindowPlusChannel, Ideal };

inline std::string to_string(IdentScheme s) {
    switch (s) {
        case IdentScheme::WindowOnly: return "window";
        case IdentScheme::WindowPlusChannel: return "channel";
        default: return "ideal";
    }
}

/// Decay-time-window identification: decays inside [T, T + dtau] tag K_S,
/// later decays tag K_L.
///   p_S = 1 - exp(-Gamma_S dtau),  p_L = exp(-Gamma_L dtau).
inline std::pair<double, double> ident_probs_window(double delta_tau, const MesonParams& p) {
    if (!(delta_tau > 0.0))
        throw std::invalid_argument("ident_probs_window: delta_tau must be > 0");
    return {1.0 - std::exp(-p.gamma_S * delta_tau), std::exp(-p.gamma_L * delta_tau)};
}

/// Decay time at which a surviving K_S and K_L are equally likely to decay
/// into pi-pi afterwards; pi-pi decays before (after) this time are
/// assigned to K_S (K_L).
inline double channel_crossover(const MesonParams& p) {
    if (!(p.br.ks_pipi > 0.0) || !(p.br.kl_pipi > 0.0))
        throw std::invalid_argument("channel_crossover: pi-pi branching ratios must be > 0");
    if (!(p.gamma_S > p.gamma_L))
        throw std::invalid_argument("channel_crossover: requires gamma_S > gamma_L");
    return std::log(p.br.ks_pipi / p.br.kl_pipi) / (p.gamma_S - p.gamma_L);
}

/// The window actually used by the channel scheme: the crossover rounded
/// to the 0.01 tau_S protocol precision (5.82 tau_S at default branching
/// ratios). Recomputing from the branching ratios keeps non-default
/// configurations self-consistent.
inline double channel_window(const MesonParams& p) {
    return std::round(channel_crossover(p) * 100.0) / 100.0;
}

/// Window-plus-channel identification: semileptonic decays always tag K_L;
/// pi-pi decays tag K_S inside the window and K_L after it.
inline std::pair<double, double> ident_probs_channel(const MesonParams& p) {
    const double w = channel_window(p);
    const double p_s = p.br.ks_pipi * (1.0 - std::exp(-p.gamma_S * w));
    const double p_l = 1.0 - p.br.kl_pipi * (1.0 - std::exp(-p.gamma_L * w));
    return {p_s, p_l};
}

/// Detection efficiencies and lifetime-identification quality. p_S and p_L
/// are derived from the scheme at construction; `window` is the scheme's
/// time cut in tau_S units (unused for Ideal).
struct EfficiencyModel {
    double eta = 1.0;      // K0 detection efficiency
    double eta_bar = 1.0;  // K0bar detection efficiency
    double eta_tau = 1.0;  // decay-product detection efficiency
    double p_S = 1.0;
    double p_L = 1.0;
    IdentScheme scheme = IdentScheme::Ideal;
    double window = 0.0;

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(eta) || !in01(eta_bar) || !in01(eta_tau) || !in01(p_S) || !in01(p_L))
            throw std::invalid_argument("EfficiencyModel: all probabilities must lie in [0,1]");
        if (scheme == IdentScheme::Ideal && (p_S != 1.0 || p_L != 1.0 || eta_tau != 1.0))
            throw std::invalid_argument("EfficiencyModel: Ideal requires p_S = p_L = eta_tau = 1");
    }

    static EfficiencyModel ideal(double eta, double eta_bar) {
        EfficiencyModel m{eta, eta_bar, 1.0, 1.0, 1.0, IdentScheme::Ideal, 0.0};
        m.validate();
        return m;
    }
    static EfficiencyModel window_scheme(double eta, double eta_bar, double eta_tau,
                                         const MesonParams& p, double delta_tau = 4.8) {
        auto [ps, pl] = ident_probs_window(delta_tau, p);
        EfficiencyModel m{eta, eta_bar, eta_tau, ps, pl, IdentScheme::WindowOnly, delta_tau};
        m.validate();
        return m;
    }
    static EfficiencyModel channel_scheme(double eta, double eta_bar, double eta_tau,
                                          const MesonParams& p) {
        auto [ps, pl] = ident_probs_channel(p);
        EfficiencyModel m{eta, eta_bar, eta_tau, ps, pl, IdentScheme::WindowPlusChannel,
                          channel_window(p)};
        m.validate();
        return m;
    }
    static EfficiencyModel make(IdentScheme s, double eta, double eta_bar, double eta_tau,
                                const MesonParams& p) {
        switch (s) {
            case IdentScheme::WindowOnly: return window_scheme(eta, eta_bar, eta_tau, p);
            case IdentScheme::WindowPlusChannel: return channel_scheme(eta, eta_bar, eta_tau, p);
            default: return ideal(eta, eta_bar);
        }
    }
};

namespace detail {

/// Hermitian 2x2 overlap matrix of a tag class over the lifetime basis:
///   W_{bb'} = sum_f M_b^f conj(M_b'^f) Int_T exp(-i (lambda_b - conj(lambda_b')) t) dt.
/// Contracting a state with W for each side gives the joint probability of
/// the corresponding tags. The K_S-tag matrix is built from the scheme;
/// the K_L-tag matrix is its complement to the identity, so the tag set
/// partitions every decay exactly.
struct TagOverlap {
    double w_ss = 0.0;
    double w_ll = 0.0;
    complex w_sl{0.0, 0.0};  // w_ls = conj(w_sl)

    /// v^dagger W v for an amplitude vector (right or left projected state).
    double quad(const std::array<complex, 2>& v) const {
        return w_ss * std::norm(v[0]) + w_ll * std::norm(v[1]) +
               2.0 * std::real(v[0] * std::conj(v[1]) * w_sl);
    }
};

/// Windowed pi-pi interference integral: Int_0^W exp((-Gbar + i dm) t) dt.
inline complex pipi_window_integral(double window, const MesonParams& p) {
    const complex z{-p.gamma_mean(), p.delta_m};
    return (std::exp(z * window) - 1.0) / z;
}

inline TagOverlap ks_tag_overlap(const EfficiencyModel& eff, const MesonParams& p) {
    TagOverlap w;
    switch (eff.scheme) {
        case IdentScheme::Ideal:
            w.w_ss = 1.0;
            return w;
        case IdentScheme::WindowOnly:
            w.w_ss = 1.0 - std::exp(-p.gamma_S * eff.window);
            w.w_ll = 1.0 - std::exp(-p.gamma_L * eff.window);
            break;
        case IdentScheme::WindowPlusChannel:
            w.w_ss = p.br.ks_pipi * (1.0 - std::exp(-p.gamma_S * eff.window));
            w.w_ll = p.br.kl_pipi * (1.0 - std::exp(-p.gamma_L * eff.window));
            break;
    }
    // Only the pi-pi channel interferes: the two conjugate semileptonic
    // modes cancel and the 3-pi mode has no K_S amplitude.
    const double m2 = p.gamma_S * p.br.ks_pipi * p.gamma_L * p.br.kl_pipi;
    if (m2 > 0.0) w.w_sl = std::sqrt(m2) * pipi_window_integral(eff.window, p);
    return w;
}

inline TagOverlap kl_tag_overlap(const TagOverlap& ks) {
    return {1.0 - ks.w_ss, 1.0 - ks.w_ll, -ks.w_sl};
}

} // namespace detail

/// Joint outcome distributions of the Hardy-state measurement, one 3x3
/// block per setting pair. Strangeness outcomes index {K0-tag, K0bar-tag,
/// Undetected}; lifetime outcomes index {K_S-tag, K_L-tag, Undetected}.
/// Each block sums to 1.
struct OutcomeModel {
    std::array<std::array<double, 3>, 3> ss{};  // (Strangeness, Strangeness)
    std::array<std::array<double, 3>, 3> sl{};  // (Strangeness, Lifetime)
    std::array<std::array<double, 3>, 3> ls{};  // (Lifetime, Strangeness)
    std::array<std::array<double, 3>, 3> ll{};  // (Lifetime, Lifetime)
};

inline OutcomeModel outcome_model(complex R, const EfficiencyModel& eff,
                                  const MesonParams& p) {
    eff.validate();
    const PairState state = hardy_state(R);
    const auto& c = state.coeffs;  // lifetime basis

    // Flavour-basis amplitudes (eps = 0) and one-side flavour projections.
    const PairState flav = pair_change_basis(state, Basis::Strangeness, Basis::Strangeness,
                                             complex{0.0});
    const double r = 1.0 / std::sqrt(2.0);
    // dv[f][b]: right amplitude vector after the left side is found as flavour f
    std::array<std::array<complex, 2>, 2> dv{};
    // ev[f][a]: left amplitude vector after the right side is found as flavour f
    std::array<std::array<complex, 2>, 2> ev{};
    for (int b = 0; b < 2; ++b) {
        dv[0][b] = r * (c[0][b] + c[1][b]);  // left K0
        dv[1][b] = r * (c[0][b] - c[1][b]);  // left K0bar
    }
    for (int a = 0; a < 2; ++a) {
        ev[0][a] = r * (c[a][0] + c[a][1]);  // right K0
        ev[1][a] = r * (c[a][0] - c[a][1]);  // right K0bar
    }

    const detail::TagOverlap wks = detail::ks_tag_overlap(eff, p);
    const detail::TagOverlap wkl = detail::kl_tag_overlap(wks);
    const double det_f[2] = {eff.eta, eff.eta_bar};
    const double eta_tau = eff.eta_tau;

    OutcomeModel m;

    // (Strangeness, Strangeness)
    for (int fl = 0; fl < 2; ++fl)
        for (int fr = 0; fr < 2; ++fr) {
            const double q = std::norm(flav.coeffs[fl][fr]);
            m.ss[fl][fr] += q * det_f[fl] * det_f[fr];
            m.ss[fl][2] += q * det_f[fl] * (1.0 - det_f[fr]);
            m.ss[2][fr] += q * (1.0 - det_f[fl]) * det_f[fr];
            m.ss[2][2] += q * (1.0 - det_f[fl]) * (1.0 - det_f[fr]);
        }

    // (Strangeness, Lifetime) and (Lifetime, Strangeness)
    for (int f = 0; f < 2; ++f) {
        const double dn = std::norm(dv[f][0]) + std::norm(dv[f][1]);
        const double tag_r[2] = {wks.quad(dv[f]), wkl.quad(dv[f])};
        for (int t = 0; t < 2; ++t) {
            m.sl[f][t] = det_f[f] * eta_tau * tag_r[t];
            m.sl[2][t] += (1.0 - det_f[f]) * eta_tau * tag_r[t];
        }
        m.sl[f][2] = det_f[f] * (1.0 - eta_tau) * dn;
        m.sl[2][2] += (1.0 - det_f[f]) * (1.0 - eta_tau) * dn;

        const double en = std::norm(ev[f][0]) + std::norm(ev[f][1]);
        const double tag_l[2] = {wks.quad(ev[f]), wkl.quad(ev[f])};
        for (int t = 0; t < 2; ++t) {
            m.ls[t][f] = eta_tau * tag_l[t] * det_f[f];
            m.ls[t][2] += eta_tau * tag_l[t] * (1.0 - det_f[f]);
        }
        m.ls[2][f] = (1.0 - eta_tau) * en * det_f[f];
        m.ls[2][2] += (1.0 - eta_tau) * en * (1.0 - det_f[f]);
    }

    // (Lifetime, Lifetime): full two-sided contraction
    //   P(tag_l, tag_r) = sum c_ab conj(c_a'b') Wl_{a,a'} Wr_{b,b'}
    auto bilinear = [&](const detail::TagOverlap& wl, const detail::TagOverlap& wr) {
        const complex wl_m[2][2] = {{complex{wl.w_ss}, wl.w_sl},
                                    {std::conj(wl.w_sl), complex{wl.w_ll}}};
        const complex wr_m[2][2] = {{complex{wr.w_ss}, wr.w_sl},
                                    {std::conj(wr.w_sl), complex{wr.w_ll}}};
        complex s{0.0, 0.0};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int b2 = 0; b2 < 2; ++b2)
                        s += c[a][b] * std::conj(c[a2][b2]) * wl_m[a][a2] * wr_m[b][b2];
        return std::real(s);
    };
    const detail::TagOverlap unit{1.0, 1.0, complex{0.0}};
    const detail::TagOverlap* tags[2] = {&wks, &wkl};
    for (int tl = 0; tl < 2; ++tl)
        for (int tr = 0; tr < 2; ++tr)
            m.ll[tl][tr] = eta_tau * eta_tau * bilinear(*tags[tl], *tags[tr]);
    for (int t = 0; t < 2; ++t) {
        m.ll[t][2] = eta_tau * (1.0 - eta_tau) * bilinear(*tags[t], unit);
        m.ll[2][t] = (1.0 - eta_tau) * eta_tau * bilinear(unit, *tags[t]);
    }
    m.ll[2][2] = (1.0 - eta_tau) * (1.0 - eta_tau) * bilinear(unit, unit);

    return m;
}

/// The joint-outcome probabilities needed by the Eberhard-H and CH-Q
/// evaluators. Every entry is a probability conditioned on the relevant
/// setting pair being measured, exactly as the H and Q definitions use
/// them; the ratios are insensitive to this convention.
struct ProbabilityTable {
    double p_k0_kbar0 = 0.0;
    double p_k0_kl = 0.0;
    double p_kl_kbar0 = 0.0;
    double p_ks_ks = 0.0;
    double p_k0_ulif = 0.0;
    double p_ulif_kbar0 = 0.0;
    double p_ks_kbar0 = 0.0;
    double p_k0_ks = 0.0;
};

inline ProbabilityTable table_from_model(const OutcomeModel& m) {
    ProbabilityTable t;
    t.p_k0_kbar0 = m.ss[0][1];
    t.p_k0_ks = m.sl[0][0];
    t.p_k0_kl = m.sl[0][1];
    t.p_k0_ulif = m.sl[0][2];
    t.p_ks_kbar0 = m.ls[0][1];
    t.p_kl_kbar0 = m.ls[1][1];
    t.p_ulif_kbar0 = m.ls[2][1];
    t.p_ks_ks = m.ll[0][0];
    return t;
}

inline ProbabilityTable hardy_table(complex R, const EfficiencyModel& eff,
                                    const MesonParams& p) {
    return table_from_model(outcome_model(R, eff, p));
}

/// Closed form for P(K_S, K_S) under the channel scheme at R = -1, up to
/// the eta_tau^2 factor applied here: the direct double-misidentification
/// terms minus the interference of the two coherent decay paths over the
/// window square.
inline double pss_closed_form(double eta_tau, const MesonParams& p) {
    if (p.species != Species::Kaon)
        throw std::invalid_argument("pss_closed_form: kaon species required");
    const double w = channel_window(p);
    auto [p_s, p_l] = ident_probs_channel(p);
    const double gbar = p.gamma_mean();
    const double denom = gbar * gbar + p.delta_m * p.delta_m;
    const double bracket = 1.0 - 2.0 * std::exp(-gbar * w) * std::cos(p.delta_m * w) +
                           std::exp(-2.0 * gbar * w);
    const double interference =
        p.br.ks_pipi * p.br.kl_pipi * p.gamma_S * p.gamma_L / denom * bracket;
    return (2.0 / 3.0) * eta_tau * eta_tau * (p_s * (1.0 - p_l) - interference);
}

/// Independent oracle for pss_closed_form: numerically integrates the
/// squared two-path pi-pi amplitude (K_L K_L component dropped) over the
/// window square. Deterministic for a fixed tolerance.
inline double pss_integral_oracle(double eta_tau, const MesonParams& p,
                                  double rel_tol = 1e-6) {
    if (p.species != Species::Kaon)
        throw std::invalid_argument("pss_integral_oracle: kaon species required");
    const double w = channel_window(p);
    const double m2 = p.gamma_S * p.br.ks_pipi * p.gamma_L * p.br.kl_pipi;
    const complex i{0.0, 1.0};
    const complex ls = p.lambda_S(), ll = p.lambda_L();
    auto integrand = [&](double tl, double tr) {
        const complex a = std::exp(-i * (ls * tl + ll * tr)) - std::exp(-i * (ll * tl + ls * tr));
        return std::norm(a);
    };
    const double integral = integrate_2d(integrand, 0.0, w, 0.0, w, rel_tol);
    return eta_tau * eta_tau * (m2 / 3.0) * integral;
}

} // namespace mesonbell
