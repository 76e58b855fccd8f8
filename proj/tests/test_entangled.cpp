#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mesonbell/pair.hpp"

using namespace mesonbell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Amplitude route for flavour x flavour joint probabilities, kept
/// independent of the closed forms in joint_probability.
double amplitude_joint(StateTag l, double tau_l, StateTag r, double tau_r,
                       const MesonParams& p) {
    const PairState evolved = evolve_pair(initial_pair(p), tau_l, tau_r, p);
    return std::norm(joint_amplitude(evolved, l, r));
}

} // namespace

TEST_CASE("creation state literal coefficients") {
    const MesonParams p = MesonParams::kaon_defaults();
    const PairState s = initial_pair(p);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(s.coeffs[0][0] == complex{0.0});
    CHECK_THAT(s.coeffs[0][1].real(), WithinAbs(r, 1e-15));
    CHECK_THAT(s.coeffs[1][0].real(), WithinAbs(-r, 1e-15));
    CHECK(s.coeffs[1][1] == complex{0.0});
    CHECK_THAT(s.norm2(), WithinAbs(1.0, 1e-15));

    const PairState lt = pair_change_basis(s, Basis::Lifetime, Basis::Lifetime, complex{0.0});
    CHECK_THAT(std::abs(lt.coeffs[0][0]), WithinAbs(0.0, 1e-15));
    CHECK_THAT(lt.coeffs[0][1].real(), WithinAbs(-r, 1e-14));
    CHECK_THAT(lt.coeffs[1][0].real(), WithinAbs(r, 1e-14));
    CHECK_THAT(std::abs(lt.coeffs[1][1]), WithinAbs(0.0, 1e-15));
}

TEST_CASE("creation state is antisymmetric in both observable bases") {
    const MesonParams p = MesonParams::kaon_defaults();
    for (const Basis b : {Basis::Strangeness, Basis::Lifetime}) {
        const PairState s =
            pair_change_basis(initial_pair(p), b, b, complex{0.0});
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK_THAT(std::abs(s.coeffs[i][j] + s.coeffs[j][i]), WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("lifetime-basis prefactor carries (1+|eps|^2)/(1-eps^2)") {
    const MesonParams p = MesonParams::kaon_defaults();
    const PairState lt =
        pair_change_basis(initial_pair(p), Basis::Lifetime, Basis::Lifetime, p.epsilon);
    const double expected =
        std::abs((1.0 + std::norm(p.epsilon)) / (1.0 - p.epsilon * p.epsilon)) / std::sqrt(2.0);
    CHECK_THAT(std::abs(lt.coeffs[0][1]), WithinRel(expected, 1e-12));
    CHECK_THAT(std::abs(lt.coeffs[1][0]), WithinRel(expected, 1e-12));
    CHECK_THAT(expected * std::sqrt(2.0), WithinAbs(1.0, 2.0 * std::norm(p.epsilon) + 1e-9));
}

TEST_CASE("evolve_pair basics") {
    const MesonParams p = MesonParams::kaon_defaults();
    const PairState s0 = initial_pair(p);

    SECTION("zero times leave the state unchanged") {
        const PairState s = evolve_pair(s0, 0.0, 0.0, p);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK_THAT(std::abs(s.coeffs[i][j] - s0.coeffs[i][j]), WithinAbs(0.0, 1e-14));
    }
    SECTION("negative times throw") {
        CHECK_THROWS_AS(evolve_pair(s0, -1.0, 0.0, p), std::domain_error);
        CHECK_THROWS_AS(evolve_pair(s0, 0.0, -1.0, p), std::domain_error);
    }
    SECTION("equal times preserve antisymmetry with equal magnitudes") {
        const double tau = 1.3;
        const PairState s = pair_change_basis(evolve_pair(s0, tau, tau, p), Basis::Lifetime,
                                              Basis::Lifetime, complex{0.0});
        CHECK_THAT(std::abs(s.coeffs[0][1]) - std::abs(s.coeffs[1][0]), WithinAbs(0.0, 1e-14));
        CHECK_THAT(std::abs(s.coeffs[0][1] + s.coeffs[1][0]), WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("joint flavour probabilities: fixed points") {
    const MesonParams p = MesonParams::kaon_defaults();
    for (const double tau : {0.0, 0.7, 2.0, 6.0})
        CHECK_THAT(joint_probability(StateTag::K0, tau, StateTag::K0, tau, p),
                   WithinAbs(0.0, 1e-14));
    CHECK_THAT(joint_probability(StateTag::K0, 0.0, StateTag::K0bar, 0.0, p),
               WithinAbs(0.5, 1e-15));
    for (const double tl : {0.0, 1.0, 3.0})
        for (const double tr : {0.0, 0.5, 2.5})
            CHECK_THAT(joint_probability(StateTag::KS, tl, StateTag::KS, tr, p),
                       WithinAbs(0.0, 1e-15));
}

TEST_CASE("joint probabilities equal the amplitude oracle") {
    const MesonParams p = MesonParams::kaon_defaults();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    for (int i = 0; i < 100; ++i) {
        const double tl = u(rng), tr = u(rng);
        for (const StateTag a : {StateTag::K0, StateTag::K0bar})
            for (const StateTag b : {StateTag::K0, StateTag::K0bar})
                CHECK_THAT(joint_probability(a, tl, b, tr, p) - amplitude_joint(a, tl, b, tr, p),
                           WithinAbs(0.0, 1e-12));
        for (const StateTag a : {StateTag::KS, StateTag::KL})
            for (const StateTag b : {StateTag::KS, StateTag::KL})
                CHECK_THAT(joint_probability(a, tl, b, tr, p) - amplitude_joint(a, tl, b, tr, p),
                           WithinAbs(0.0, 1e-12));
    }
    // spot value from the opposite-flavour closed form
    const double v = joint_probability(StateTag::K0, 1.0, StateTag::K0bar, 0.5, p);
    CHECK_THAT(v - amplitude_joint(StateTag::K0, 1.0, StateTag::K0bar, 0.5, p),
               WithinAbs(0.0, 1e-14));
}

TEST_CASE("mixed-basis joint probabilities come from the evolved amplitudes") {
    const MesonParams p = MesonParams::kaon_defaults();
    const double tl = 1.1, tr = 0.4;
    const PairState evolved = pair_change_basis(evolve_pair(initial_pair(p), tl, tr, p),
                                                Basis::Strangeness, Basis::Lifetime,
                                                complex{0.0});
    const double direct = std::norm(joint_amplitude(evolved, StateTag::K0, StateTag::KS));
    CHECK_THAT(joint_probability(StateTag::K0, tl, StateTag::KS, tr, p),
               WithinRel(direct, 1e-12));
}

TEST_CASE("four-outcome sum matches the two-sided survival envelope") {
    const MesonParams p = MesonParams::kaon_defaults();
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double tl = u(rng), tr = u(rng);
        double sum = 0.0;
        for (const StateTag a : {StateTag::K0, StateTag::K0bar})
            for (const StateTag b : {StateTag::K0, StateTag::K0bar})
                sum += joint_probability(a, tl, b, tr, p);
        const double envelope = 0.5 * (std::exp(-(p.gamma_L * tl + p.gamma_S * tr)) +
                                       std::exp(-(p.gamma_S * tl + p.gamma_L * tr)));
        CHECK_THAT(sum - envelope, WithinAbs(0.0, 1e-12));
        double oracle_sum = 0.0;
        for (const StateTag a : {StateTag::K0, StateTag::K0bar})
            for (const StateTag b : {StateTag::K0, StateTag::K0bar})
                oracle_sum += amplitude_joint(a, tl, b, tr, p);
        CHECK_THAT(sum - oracle_sum, WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("left-right exchange symmetry") {
    const MesonParams p = MesonParams::kaon_defaults();
    for (const StateTag a : {StateTag::K0, StateTag::K0bar, StateTag::KS, StateTag::KL})
        for (const StateTag b : {StateTag::K0, StateTag::K0bar, StateTag::KS, StateTag::KL})
            for (const double tl : {0.2, 1.5})
                for (const double tr : {0.9, 4.0})
                    CHECK_THAT(joint_probability(a, tl, b, tr, p) -
                                   joint_probability(b, tr, a, tl, p),
                               WithinAbs(0.0, 1e-13));
}

TEST_CASE("interference visibility depends only on the time difference") {
    const MesonParams p = MesonParams::kaon_defaults();
    auto visibility = [&](double tl, double tr) {
        const double same = joint_probability(StateTag::K0, tl, StateTag::K0, tr, p);
        const double opp = joint_probability(StateTag::K0, tl, StateTag::K0bar, tr, p);
        return (opp - same) / (opp + same);
    };
    for (const double dt : {0.0, 0.5, 2.0, 5.0}) {
        const double expected =
            std::cos(p.delta_m * dt) / std::cosh(0.5 * p.delta_gamma() * dt);
        CHECK_THAT(visibility(dt, 0.0), WithinAbs(expected, 1e-12));
        CHECK_THAT(visibility(1.0 + dt, 1.0), WithinAbs(expected, 1e-12));
        CHECK_THAT(visibility(3.5 + dt, 3.5), WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("same-flavour terms dominate at dm dt = pi") {
    // At dm (tau_l - tau_r) = pi the oscillation term is fully inverted:
    // the same-flavour weight exceeds the opposite-flavour weight, and the
    // visibility saturates at -1/cosh(dGamma dt / 2) for that damping.
    const MesonParams p = MesonParams::kaon_defaults();
    const double dt = M_PI / p.delta_m;
    const double same = joint_probability(StateTag::K0, dt, StateTag::K0, 0.0, p);
    const double opp = joint_probability(StateTag::K0, dt, StateTag::K0bar, 0.0, p);
    CHECK(same > opp);
    CHECK_THAT((same - opp) / (same + opp),
               WithinRel(1.0 / std::cosh(0.5 * p.delta_gamma() * dt), 1e-12));
    CHECK_THAT(same, WithinRel(amplitude_joint(StateTag::K0, dt, StateTag::K0, 0.0, p), 1e-12));

    // with equal widths the damping is absent and pi is literally the peak
    const MesonParams b = MesonParams::b_defaults(0.77);
    const double dtb = M_PI / b.delta_m;
    auto same_frac = [&](double d) {
        const double s = joint_probability_beauty(StateTag::K0, d, StateTag::K0, 0.0, b);
        const double o = joint_probability_beauty(StateTag::K0, d, StateTag::K0bar, 0.0, b);
        return s / (s + o);
    };
    CHECK(same_frac(dtb) > same_frac(0.8 * dtb));
    CHECK(same_frac(dtb) > same_frac(1.2 * dtb));
    CHECK_THAT(same_frac(dtb), WithinAbs(1.0, 1e-12));
}

TEST_CASE("beauty pair probabilities") {
    const MesonParams b = MesonParams::b_defaults(0.77);

    SECTION("perfect EPR correlations at equal times") {
        for (const double tau : {0.0, 0.6, 2.2})
            CHECK_THAT(joint_probability_beauty(StateTag::K0, tau, StateTag::K0, tau, b),
                       WithinAbs(0.0, 1e-15));
    }
    SECTION("opposite beauty at creation") {
        CHECK_THAT(joint_probability_beauty(StateTag::K0, 0.0, StateTag::K0bar, 0.0, b),
                   WithinAbs(0.5, 1e-15));
    }
    SECTION("same beauty at dm dt = pi") {
        const double dt = M_PI / b.delta_m;
        const double tl = dt + 0.4, tr = 0.4;
        CHECK_THAT(joint_probability_beauty(StateTag::K0, tl, StateTag::K0, tr, b),
                   WithinRel(0.5 * std::exp(-(tl + tr)), 1e-12));
    }
    SECTION("pairwise sum rule") {
        for (const double tl : {0.1, 1.0, 3.0})
            for (const double tr : {0.0, 0.8}) {
                const double same =
                    joint_probability_beauty(StateTag::K0, tl, StateTag::K0, tr, b);
                const double opp =
                    joint_probability_beauty(StateTag::K0, tl, StateTag::K0bar, tr, b);
                CHECK_THAT(same + opp, WithinRel(0.5 * std::exp(-(tl + tr)), 1e-13));
            }
    }
    SECTION("species and tag validation") {
        const MesonParams k = MesonParams::kaon_defaults();
        CHECK_THROWS_AS(joint_probability_beauty(StateTag::K0, 0.0, StateTag::K0bar, 0.0, k),
                        std::invalid_argument);
        CHECK_THROWS_AS(joint_probability_beauty(StateTag::KS, 0.0, StateTag::K0bar, 0.0, b),
                        std::invalid_argument);
    }
    SECTION("matches the generic machinery run with equal widths") {
        for (const double tl : {0.3, 1.7})
            for (const double tr : {0.0, 2.4})
                for (const StateTag r : {StateTag::K0, StateTag::K0bar})
                    CHECK_THAT(joint_probability_beauty(StateTag::K0, tl, r, tr, b) -
                                   joint_probability(StateTag::K0, tl, r, tr, b),
                               WithinAbs(0.0, 1e-13));
    }
}
