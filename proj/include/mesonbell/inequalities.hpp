#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesonbell/detector.hpp"
#include "mesonbell/pair.hpp"

namespace mesonbell {

enum class InequalityName { CHSH, WignerUchiyama, EberhardH, ClauserHorneQ };

inline std::string to_string(InequalityName n) {
    switch (n) {
        case InequalityName::CHSH: return "chsh";
        case InequalityName::WignerUchiyama: return "wigner_uchiyama";
        case InequalityName::EberhardH: return "eberhard_h";
        default: return "clauser_horne_q";
    }
}

struct InequalityReport {
    InequalityName name = InequalityName::CHSH;
    double value = 0.0;
    double bound = 0.0;
    bool violated = false;
    std::string inputs;
};

/// Flavour correlation function of the two-time singlet,
///   E(tau_l, tau_r) = -exp(-(Gamma_L + Gamma_S)(tau_l + tau_r)/2)
///                      cos(dm (tau_l - tau_r)),
/// equal to the (same-flavour minus opposite-flavour) combination of the
/// joint detection probabilities with "yes" meaning a K0bar is found.
inline double chsh_correlation(double tau_l, double tau_r, const MesonParams& p) {
    if (!(tau_l >= 0.0) || !(tau_r >= 0.0))
        throw std::domain_error("chsh_correlation: times must be >= 0");
    return -std::exp(-p.gamma_mean() * (tau_l + tau_r)) *
           std::cos(p.delta_m * (tau_l - tau_r));
}

/// |E(t1,t3) - E(t1,t4) + E(t2,t3) + E(t2,t4)|.
inline double chsh_value(double t1, double t2, double t3, double t4, const MesonParams& p) {
    return std::abs(chsh_correlation(t1, t3, p) - chsh_correlation(t1, t4, p) +
                    chsh_correlation(t2, t3, p) + chsh_correlation(t2, t4, p));
}

inline InequalityReport chsh_report(double t1, double t2, double t3, double t4,
                                    const MesonParams& p) {
    const double v = chsh_value(t1, t2, t3, t4, p);
    return {InequalityName::CHSH, v, 2.0, v > 2.0, ""};
}

struct ChshSearchResult {
    double max_value = 0.0;            // best |S| over distinct settings
    std::array<double, 4> times{};     // argmax (t1, t2, t3, t4)
    double grid_sup = 0.0;             // sup over the full grid, degenerate
                                       // setting pairs included
    bool violated = false;
};

namespace detail {

/// Nelder-Mead polish of |S| inside [0, t_max]^4, keeping the two settings
/// on each side at least `sep` apart.
inline void nelder_mead_chsh(const MesonParams& p, double t_max, double sep,
                             std::array<double, 4>& x, double& fx) {
    auto eval = [&](const std::array<double, 4>& t) {
        for (double v : t)
            if (v < 0.0 || v > t_max) return -1.0;
        if (std::abs(t[0] - t[1]) < sep || std::abs(t[2] - t[3]) < sep) return -1.0;
        return chsh_value(t[0], t[1], t[2], t[3], p);
    };
    std::array<std::array<double, 4>, 5> simplex;
    std::array<double, 5> f;
    simplex[0] = x;
    f[0] = eval(x);
    for (int i = 1; i < 5; ++i) {
        simplex[i] = x;
        simplex[i][i - 1] = std::clamp(simplex[i][i - 1] + 0.02, 0.0, t_max);
        f[i] = eval(simplex[i]);
    }
    auto order = [&] {
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                if (f[j] > f[i]) {
                    std::swap(f[i], f[j]);
                    std::swap(simplex[i], simplex[j]);
                }
    };
    for (int it = 0; it < 400; ++it) {
        order();
        std::array<double, 4> centroid{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) centroid[k] += simplex[i][k] / 4.0;
        auto blend = [&](double alpha) {
            std::array<double, 4> t;
            for (int k = 0; k < 4; ++k)
                t[k] = centroid[k] + alpha * (centroid[k] - simplex[4][k]);
            return t;
        };
        const auto refl = blend(1.0);
        const double fr = eval(refl);
        if (fr > f[0]) {
            const auto exp_pt = blend(2.0);
            const double fe = eval(exp_pt);
            if (fe > fr) { simplex[4] = exp_pt; f[4] = fe; }
            else { simplex[4] = refl; f[4] = fr; }
        } else if (fr > f[3]) {
            simplex[4] = refl; f[4] = fr;
        } else {
            const auto con = blend(-0.5);
            const double fc = eval(con);
            if (fc > f[4]) { simplex[4] = con; f[4] = fc; }
            else {
                for (int i = 1; i < 5; ++i) {
                    for (int k = 0; k < 4; ++k)
                        simplex[i][k] = 0.5 * (simplex[i][k] + simplex[0][k]);
                    f[i] = eval(simplex[i]);
                }
            }
        }
    }
    order();
    if (f[0] > fx) { fx = f[0]; x = simplex[0]; }
}

} // namespace detail

/// Grid search plus local polish for the largest CHSH combination over
/// measurement times in [0, t_max]. The two times on each side must be
/// distinct settings (separated by at least the grid step); the supremum
/// over coincident settings is also reported, since it trivially reaches 2
/// at tau -> 0 without constituting a violation.
inline ChshSearchResult chsh_search(const MesonParams& p, double t_max = 10.0,
                                    double step = 0.05, bool polish = true) {
    if (!(t_max > 0.0) || !(step > 0.0) || step > t_max)
        throw std::invalid_argument("chsh_search: need 0 < step <= t_max");
    const int n = static_cast<int>(std::floor(t_max / step)) + 1;
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = i * step;
    std::vector<std::vector<double>> E(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) E[i][j] = chsh_correlation(ts[i], ts[j], p);

    ChshSearchResult res;
    std::vector<double> d(n), su(n);
    for (int j3 = 0; j3 < n; ++j3)
        for (int j4 = 0; j4 < n; ++j4) {
            if (j3 == j4) continue;
            for (int i = 0; i < n; ++i) {
                d[i] = E[i][j3] - E[i][j4];
                su[i] = E[i][j3] + E[i][j4];
            }
            // top-2 maxima/minima so that i1 != i2 can always be honoured
            int dmax1 = 0, dmax2 = -1, dmin1 = 0, dmin2 = -1;
            int smax1 = 0, smax2 = -1, smin1 = 0, smin2 = -1;
            for (int i = 1; i < n; ++i) {
                if (d[i] > d[dmax1]) { dmax2 = dmax1; dmax1 = i; }
                else if (dmax2 < 0 || d[i] > d[dmax2]) dmax2 = i;
                if (d[i] < d[dmin1]) { dmin2 = dmin1; dmin1 = i; }
                else if (dmin2 < 0 || d[i] < d[dmin2]) dmin2 = i;
                if (su[i] > su[smax1]) { smax2 = smax1; smax1 = i; }
                else if (smax2 < 0 || su[i] > su[smax2]) smax2 = i;
                if (su[i] < su[smin1]) { smin2 = smin1; smin1 = i; }
                else if (smin2 < 0 || su[i] < su[smin2]) smin2 = i;
            }
            auto consider = [&](int i1, int i2) {
                if (i1 < 0 || i2 < 0) return;
                const double sdeg = std::abs(d[i1] + su[i2]);
                if (i1 != i2 && sdeg > res.max_value) {
                    res.max_value = sdeg;
                    res.times = {ts[i1], ts[i2], ts[j3], ts[j4]};
                }
                if (sdeg > res.grid_sup) res.grid_sup = sdeg;
            };
            consider(dmax1, smax1);
            consider(dmax1, smax2);
            consider(dmax2, smax1);
            consider(dmin1, smin1);
            consider(dmin1, smin2);
            consider(dmin2, smin1);
            // degenerate sup tracking (i1 == i2)
            for (int i : {dmax1, dmin1, smax1, smin1}) {
                const double sdeg = std::abs(d[i] + su[i]);
                if (sdeg > res.grid_sup) res.grid_sup = sdeg;
            }
        }
    if (polish) detail::nelder_mead_chsh(p, t_max, step, res.times, res.max_value);
    res.violated = res.max_value > 2.0;
    return res;
}

/// Wigner-like test at tau -> 0 on the creation state with the CP-mixing
/// parameter retained, together with its algebraic reduction. The flavour
/// label convention is fixed by requiring the three-probability form to
/// reduce exactly to Re eps <= |eps|^2; with the mixing matrices used here
/// that places the conjugate flavour on the strangeness side.
struct WignerReport {
    InequalityReport report;
    double p_lifetime_flavour = 0.0;  // left side of the inequality
    double p_lifetime_cp = 0.0;       // first right-side term
    double p_cp_flavour = 0.0;        // second right-side term
    double re_eps = 0.0;
    double abs_eps_sq = 0.0;
};

inline WignerReport wigner_uchiyama(complex eps) {
    if (!(std::abs(eps) < 1.0))
        throw std::invalid_argument("wigner_uchiyama: require |eps| < 1");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // creation-state coefficients in the flavour basis
    const std::array<std::array<complex, 2>, 2> phi = {
        std::array<complex, 2>{complex{0.0}, complex{inv_sqrt2}},
        std::array<complex, 2>{complex{-inv_sqrt2}, complex{0.0}}};
    const double nn = 1.0 / std::sqrt(2.0 * (1.0 + std::norm(eps)));
    const std::array<complex, 2> ks = {nn * (1.0 + eps), nn * (1.0 - eps)};
    const std::array<complex, 2> k1 = {complex{inv_sqrt2}, complex{inv_sqrt2}};
    const std::array<complex, 2> flav = {complex{0.0}, complex{1.0}};
    auto prob = [&](const std::array<complex, 2>& bl, const std::array<complex, 2>& br) {
        complex a{0.0, 0.0};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                a += std::conj(bl[i]) * phi[i][j] * std::conj(br[j]);
        return std::norm(a);
    };
    WignerReport w;
    w.p_lifetime_flavour = prob(ks, flav);
    w.p_lifetime_cp = prob(ks, k1);
    w.p_cp_flavour = prob(k1, flav);
    w.re_eps = std::real(eps);
    w.abs_eps_sq = std::norm(eps);
    const double rhs = w.p_lifetime_cp + w.p_cp_flavour;
    w.report = {InequalityName::WignerUchiyama, w.p_lifetime_flavour, rhs,
                w.p_lifetime_flavour > rhs, ""};
    return w;
}

/// H = P(K0,K0bar) / [P(K0,K_L) + P(K_S,K_S) + P(K_L,K0bar)
///                   + P(K0,U_lif) + P(U_lif,K0bar)], bound 1.
/// A vanishing denominator (the ideal-identification limit) is reported as
/// +infinity and counts as a violation whenever the numerator is positive.
inline InequalityReport eberhard_H(const ProbabilityTable& t) {
    const double num = t.p_k0_kbar0;
    const double den =
        t.p_k0_kl + t.p_ks_ks + t.p_kl_kbar0 + t.p_k0_ulif + t.p_ulif_kbar0;
    InequalityReport r;
    r.name = InequalityName::EberhardH;
    r.bound = 1.0;
    if (den <= 0.0) {
        r.value = std::numeric_limits<double>::infinity();
        r.violated = num > 0.0;
    } else {
        r.value = num / den;
        r.violated = r.value > 1.0;
    }
    return r;
}

/// Q = [P(K_S,K0bar) - P(K_S,K_S) + P(K0,K0bar) + P(K0,K_S)]
///     / [P(K0,*) + P(*,K0bar)], bound 1, with the starred single-side
/// sums running over lifetime outcomes including undetection.
inline InequalityReport ch_Q(const ProbabilityTable& t) {
    const double num = t.p_ks_kbar0 - t.p_ks_ks + t.p_k0_kbar0 + t.p_k0_ks;
    const double den = (t.p_k0_ks + t.p_k0_kl + t.p_k0_ulif) +
                       (t.p_kl_kbar0 + t.p_ks_kbar0 + t.p_ulif_kbar0);
    if (den <= 0.0) throw std::domain_error("ch_Q: single-side sums vanish");
    const double q = num / den;
    return {InequalityName::ClauserHorneQ, q, 1.0, q > 1.0, ""};
}

enum class ScanRelation { Equal, EtaBarDouble, Grid };

inline std::string to_string(ScanRelation r) {
    switch (r) {
        case ScanRelation::Equal: return "equal";
        case ScanRelation::EtaBarDouble: return "double";
        default: return "grid";
    }
}

struct ScanPoint {
    double eta_tau = 0.0;
    double eta = 0.0;
    double eta_bar = 0.0;
    bool found = false;
};

struct ThresholdScan {
    ScanRelation relation = ScanRelation::Equal;
    std::vector<ScanPoint> points;
};

namespace detail {

/// Bisection for the smallest eta with H > 1 along eta_bar = ray(eta).
inline ScanPoint threshold_on_ray(const std::function<double(double)>& eta_bar_of_eta,
                                  double eta_tau, IdentScheme scheme, complex R,
                                  const MesonParams& p, double tol) {
    auto violated = [&](double eta) {
        const double eb = std::min(1.0, eta_bar_of_eta(eta));
        const auto eff = EfficiencyModel::make(scheme, eta, eb, eta_tau, p);
        return eberhard_H(hardy_table(R, eff, p)).violated;
    };
    ScanPoint pt;
    pt.eta_tau = eta_tau;
    if (!violated(1.0)) return pt;  // no crossing inside the unit square
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (violated(mid) ? hi : lo) = mid;
    }
    pt.eta = 0.5 * (lo + hi);
    pt.eta_bar = std::min(1.0, eta_bar_of_eta(pt.eta));
    pt.found = true;
    return pt;
}

} // namespace detail

/// Boundary H = Q = 1 in the (eta, eta_bar) unit square for each eta_tau.
/// Equal and EtaBarDouble emit the single threshold on the respective ray;
/// Grid emits a curve point (bisected in eta) for each of `resolution`
/// eta_bar values, log-spaced over [1e-3, 1]. Points without a crossing
/// are kept with found = false.
inline ThresholdScan threshold_scan(const std::vector<double>& eta_tau_list,
                                    ScanRelation relation, int resolution,
                                    const MesonParams& p,
                                    IdentScheme scheme = IdentScheme::WindowPlusChannel,
                                    complex R = complex{-1.0, 0.0},
                                    double tol = 1e-4) {
    if (resolution <= 0) throw std::invalid_argument("threshold_scan: resolution must be > 0");
    ThresholdScan scan;
    scan.relation = relation;
    for (double et : eta_tau_list) {
        if (relation == ScanRelation::Equal) {
            scan.points.push_back(detail::threshold_on_ray(
                [](double e) { return e; }, et, scheme, R, p, tol));
        } else if (relation == ScanRelation::EtaBarDouble) {
            scan.points.push_back(detail::threshold_on_ray(
                [](double e) { return 2.0 * e; }, et, scheme, R, p, tol));
        } else {
            for (int k = 0; k < resolution; ++k) {
                const double frac = resolution == 1 ? 1.0
                                                    : static_cast<double>(k) / (resolution - 1);
                const double eta_bar = std::pow(10.0, -3.0 * (1.0 - frac));
                auto violated = [&](double eta) {
                    const auto eff = EfficiencyModel::make(scheme, eta, eta_bar, et, p);
                    return eberhard_H(hardy_table(R, eff, p)).violated;
                };
                ScanPoint pt;
                pt.eta_tau = et;
                pt.eta_bar = eta_bar;
                if (violated(1.0)) {
                    double lo = 0.0, hi = 1.0;
                    while (hi - lo > tol) {
                        const double mid = 0.5 * (lo + hi);
                        (violated(mid) ? hi : lo) = mid;
                    }
                    pt.eta = 0.5 * (lo + hi);
                    pt.found = true;
                }
                scan.points.push_back(pt);
            }
        }
    }
    return scan;
}

/// CSV rows `eta_tau,eta,eta_bar`; absent crossings carry eta = nan.
inline void write_scan_csv(const ThresholdScan& scan, std::ostream& os) {
    os << "eta_tau,eta,eta_bar\n";
    char buf[128];
    for (const auto& pt : scan.points) {
        if (pt.found)
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", pt.eta_tau, pt.eta,
                          pt.eta_bar);
        else
            std::snprintf(buf, sizeof(buf), "%.10g,nan,%.10g\n", pt.eta_tau, pt.eta_bar);
        os << buf;
    }
}

} // namespace mesonbell
