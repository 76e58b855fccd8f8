#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mesonbell/regen.hpp"

using namespace mesonbell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("regeneration parameter closed form") {
    RegeneratorSpec spec;
    spec.f = complex{1.2, -0.4};
    spec.fbar = complex{0.7, 0.1};
    spec.nu = 0.05;
    spec.d = 0.002;
    spec.p_K = 4.0;
    spec.m_K = 2.0;

    SECTION("value matches direct arithmetic") {
        const complex r = regeneration_parameter(spec);
        const complex expected =
            complex{0.0, 1.0} * M_PI * spec.nu / spec.p_K * (spec.f - spec.fbar) * spec.d;
        CHECK_THAT(std::abs(r - expected), WithinAbs(0.0, 1e-18));
    }
    SECTION("equal amplitudes regenerate nothing") {
        spec.fbar = spec.f;
        CHECK_THAT(std::abs(regeneration_parameter(spec)), WithinAbs(0.0, 1e-18));
    }
    SECTION("zero thickness regenerates nothing") {
        spec.d = 0.0;
        CHECK_THAT(std::abs(regeneration_parameter(spec)), WithinAbs(0.0, 1e-18));
    }
    SECTION("linear in the thickness") {
        const double r1 = std::abs(regeneration_parameter(spec));
        spec.d *= 2.0;
        CHECK_THAT(std::abs(regeneration_parameter(spec)), WithinRel(2.0 * r1, 1e-13));
    }
    SECTION("thin-slab condition enforced") {
        spec.d = 0.5;  // crossing time 0.5 * 2 / 4 = 0.25 tau_S
        CHECK_THAT(spec.crossing_time(), WithinRel(0.25, 1e-15));
        CHECK_THROWS_AS(regeneration_parameter(spec), thin_regenerator_violation);
    }
    SECTION("invalid geometry rejected") {
        spec.d = -1.0;
        CHECK_THROWS_AS(regeneration_parameter(spec), std::invalid_argument);
    }
}

TEST_CASE("effective R growth and phase") {
    const MesonParams p = MesonParams::kaon_defaults();
    const complex r{0.01, 0.02};

    SECTION("T = 0 gives -r") {
        CHECK_THAT(std::abs(effective_R(r, 0.0, p) + r), WithinAbs(0.0, 1e-18));
    }
    SECTION("negative T rejected") {
        CHECK_THROWS_AS(effective_R(r, -1.0, p), std::domain_error);
    }
    SECTION("|R| = |r| exp((Gamma_S - Gamma_L) T / 2), monotone growth") {
        double prev = std::abs(r);
        for (const double T : {0.5, 1.0, 2.0, 5.0, 9.0}) {
            const double expected =
                std::abs(r) * std::exp(0.5 * (p.gamma_S - p.gamma_L) * T);
            const double got = std::abs(effective_R(r, T, p));
            CHECK_THAT(got, WithinRel(expected, 1e-12));
            CHECK(got > prev);
            prev = got;
        }
    }
    SECTION("phase advances by -dm T") {
        const double T = 2.7;
        const double d = std::arg(effective_R(r, T, p)) - std::arg(effective_R(r, 0.0, p));
        double expected = -p.delta_m * T;
        while (expected <= -M_PI) expected += 2.0 * M_PI;
        double wrapped = d;
        while (wrapped <= -M_PI) wrapped += 2.0 * M_PI;
        while (wrapped > M_PI) wrapped -= 2.0 * M_PI;
        CHECK_THAT(wrapped, WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("prepared state coefficients and normalization") {
    SECTION("R = 0 restores the antisymmetric survivor state") {
        const PairState s = hardy_state(complex{0.0, 0.0});
        const double r = 1.0 / std::sqrt(2.0);
        CHECK_THAT(s.coeffs[0][1].real(), WithinAbs(r, 1e-15));
        CHECK_THAT(s.coeffs[1][0].real(), WithinAbs(-r, 1e-15));
        CHECK_THAT(std::abs(s.coeffs[1][1]), WithinAbs(0.0, 1e-15));
        CHECK(s.norm_note == NormNote::RenormalizedToSurvivors);
    }
    SECTION("R = -1 gives equal squared weights 1/3") {
        const PairState s = hardy_state(complex{-1.0, 0.0});
        CHECK_THAT(std::norm(s.coeffs[0][1]), WithinRel(1.0 / 3.0, 1e-14));
        CHECK_THAT(std::norm(s.coeffs[1][0]), WithinRel(1.0 / 3.0, 1e-14));
        CHECK_THAT(std::norm(s.coeffs[1][1]), WithinRel(1.0 / 3.0, 1e-14));
    }
    SECTION("unit norm across the complex R plane") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int i = 0; i < 200; ++i) {
            const PairState s = hardy_state(complex{u(rng), u(rng)});
            CHECK_THAT(s.norm2(), WithinAbs(1.0, 1e-13));
        }
    }
}

TEST_CASE("Hardy orthogonality conditions at R = -1") {
    const PairState s = hardy_state(complex{-1.0, 0.0});
    CHECK_THAT(std::abs(joint_amplitude(s, StateTag::K0, StateTag::KL)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(joint_amplitude(s, StateTag::KL, StateTag::K0bar)),
               WithinAbs(0.0, 1e-15));
    // the nonvanishing Hardy projections
    CHECK_THAT(std::norm(joint_amplitude(s, StateTag::K0, StateTag::K0bar)),
               WithinRel(1.0 / 12.0, 1e-13));
    CHECK_THAT(std::norm(joint_amplitude(s, StateTag::K0, StateTag::KS)),
               WithinRel(1.0 / 6.0, 1e-13));
    CHECK_THAT(std::norm(joint_amplitude(s, StateTag::KS, StateTag::K0bar)),
               WithinRel(1.0 / 6.0, 1e-13));
}

TEST_CASE("R -> 0 degenerates to the creation-state survivor projections") {
    const MesonParams p = MesonParams::kaon_defaults();
    const PairState singlet =
        pair_change_basis(initial_pair(p), Basis::Lifetime, Basis::Lifetime, complex{0.0});
    // renormalize to survivors: the creation state already has unit norm
    const PairState prepared = hardy_state(complex{0.0, 0.0});
    for (const StateTag a : {StateTag::K0, StateTag::K0bar, StateTag::KS, StateTag::KL})
        for (const StateTag b : {StateTag::K0, StateTag::K0bar, StateTag::KS, StateTag::KL})
            CHECK_THAT(std::norm(joint_amplitude(prepared, a, b)) -
                           std::norm(joint_amplitude(singlet, a, b)),
                       WithinAbs(0.0, 1e-13));
}

TEST_CASE("preparation time solves |R(T)| = 1") {
    const MesonParams p = MesonParams::kaon_defaults();
    for (const double abs_r : {0.003, 0.05, 0.4}) {
        const complex r = std::polar(abs_r, 1.1);
        const HardyPreparationSolution sol = hardy_preparation_time(r, p);
        CHECK(sol.T > 0.0);
        CHECK_THAT(std::abs(sol.R), WithinRel(1.0, 1e-12));
        CHECK_THAT(std::abs(effective_R(r, sol.T, p)), WithinRel(1.0, 1e-12));
        CHECK(sol.phase_residual > -M_PI);
        CHECK(sol.phase_residual <= M_PI);
    }
    CHECK_THROWS_AS(hardy_preparation_time(complex{0.0, 0.0}, p), std::domain_error);
    CHECK_THROWS_AS(hardy_preparation_time(complex{2.0, 0.0}, p), std::domain_error);
}

TEST_CASE("continuity of effective_R after regeneration_parameter near r = 0") {
    const MesonParams p = MesonParams::kaon_defaults();
    RegeneratorSpec spec;
    spec.f = complex{0.9, -0.2};
    spec.fbar = complex{0.5, 0.3};
    spec.nu = 1e-3;
    spec.d = 1e-3;
    spec.p_K = 10.0;
    spec.m_K = 2.0;
    const complex r1 = regeneration_parameter(spec);
    spec.d = 1e-6;
    const complex r2 = regeneration_parameter(spec);
    CHECK(std::abs(r2) < 1e-3 * std::abs(r1));
    const complex R2 = effective_R(r2, 1.0, p);
    CHECK(std::abs(R2) < 1e-6);
}

TEST_CASE("minimum separation time") {
    CHECK_THAT(min_separation_time(4.8, 0.22), WithinRel(8.50909090909, 1e-10));
    CHECK_THAT(min_separation_time(2.0, 0.5), WithinRel(1.0, 1e-14));
    CHECK(min_separation_time(4.8, 0.999999) < 1e-5);
    CHECK_THROWS_AS(min_separation_time(4.8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(min_separation_time(4.8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(min_separation_time(0.0, 0.22), std::invalid_argument);
}
