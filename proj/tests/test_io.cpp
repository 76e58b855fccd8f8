#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mesonbell/json_io.hpp"

using namespace mesonbell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("meson parameters from JSON: defaults and overrides") {
    SECTION("empty document gives kaon defaults") {
        const MesonParams p = meson_params_from_json(json::object());
        CHECK(p.species == Species::Kaon);
        CHECK_THAT(p.gamma_S / p.gamma_L, WithinRel(579.0, 1e-12));
    }
    SECTION("field overrides are applied") {
        const MesonParams p = meson_params_from_json(json{
            {"species", "kaon"},
            {"delta_m", 0.5},
            {"beta", 0.9},
            {"epsilon", {{"re", 1e-3}, {"im", 2e-3}}},
            {"br", {{"kl_pipi", 0.004}}}});
        CHECK(p.delta_m == 0.5);
        CHECK(p.beta == 0.9);
        CHECK(p.epsilon == complex{1e-3, 2e-3});
        CHECK(p.br.kl_pipi == 0.004);
        CHECK(p.br.ks_pipi == 0.9989);  // untouched default
    }
    SECTION("epsilon accepts polar form and bare numbers") {
        const MesonParams a = meson_params_from_json(
            json{{"epsilon", {{"abs", 2.284e-3}, {"phase_deg", 90.0}}}});
        CHECK_THAT(a.epsilon.real(), WithinAbs(0.0, 1e-18));
        CHECK_THAT(a.epsilon.imag(), WithinRel(2.284e-3, 1e-12));
        const MesonParams b = meson_params_from_json(json{{"epsilon", 1.5e-3}});
        CHECK(b.epsilon == complex{1.5e-3, 0.0});
    }
    SECTION("B documents need delta_m") {
        CHECK_THROWS_AS(meson_params_from_json(json{{"species", "b"}}), std::invalid_argument);
        const MesonParams b = meson_params_from_json(json{{"species", "b"}, {"delta_m", 0.7}});
        CHECK(b.species == Species::BMeson);
        CHECK(b.gamma_S == b.gamma_L);
    }
    SECTION("unknown species rejected") {
        CHECK_THROWS_AS(meson_params_from_json(json{{"species", "pion"}}),
                        std::invalid_argument);
    }
    SECTION("invalid physics rejected") {
        CHECK_THROWS_AS(meson_params_from_json(json{{"delta_m", -1.0}}), std::invalid_argument);
    }
    SECTION("round trip through to_json") {
        const MesonParams p = MesonParams::kaon_defaults();
        const MesonParams q = meson_params_from_json(meson_params_to_json(p));
        CHECK(q.gamma_S == p.gamma_S);
        CHECK(q.gamma_L == p.gamma_L);
        CHECK(q.delta_m == p.delta_m);
        CHECK(q.epsilon == p.epsilon);
        CHECK(q.br.ks_pipi == p.br.ks_pipi);
        CHECK(q.beta == p.beta);
    }
}

TEST_CASE("efficiency model from JSON") {
    const MesonParams p = MesonParams::kaon_defaults();
    SECTION("channel scheme defaults") {
        const EfficiencyModel e = efficiency_from_json(json{{"eta", 0.3}}, p);
        CHECK(e.scheme == IdentScheme::WindowPlusChannel);
        CHECK(e.eta == 0.3);
        CHECK(e.eta_bar == 1.0);
        CHECK_THAT(e.p_S, WithinAbs(0.99594, 1e-5));
    }
    SECTION("window scheme with custom window") {
        const EfficiencyModel e = efficiency_from_json(
            json{{"scheme", "window"}, {"window", 3.0}, {"eta_tau", 0.9}}, p);
        CHECK(e.scheme == IdentScheme::WindowOnly);
        CHECK(e.window == 3.0);
        CHECK_THAT(e.p_S, WithinRel(1.0 - std::exp(-3.0), 1e-13));
    }
    SECTION("ideal scheme") {
        const EfficiencyModel e =
            efficiency_from_json(json{{"scheme", "ideal"}, {"eta", 0.2}}, p);
        CHECK(e.p_S == 1.0);
        CHECK(e.eta_tau == 1.0);
    }
    SECTION("explicit p_S/p_L rejected") {
        CHECK_THROWS_AS(efficiency_from_json(json{{"p_s", 0.99}}, p), std::invalid_argument);
        CHECK_THROWS_AS(efficiency_from_json(json{{"p_L", 0.99}}, p), std::invalid_argument);
    }
    SECTION("unknown scheme rejected") {
        CHECK_THROWS_AS(efficiency_from_json(json{{"scheme", "magic"}}, p),
                        std::invalid_argument);
    }
}

TEST_CASE("regenerator spec from JSON") {
    const json doc{{"f", {{"re", 1.1}, {"im", -0.3}}},
                   {"fbar", {{"re", 0.6}, {"im", 0.2}}},
                   {"nu", 0.01},
                   {"d", 0.001},
                   {"p_k", 5.0},
                   {"m_k", 2.5}};
    const RegeneratorSpec s = regenerator_from_json(doc);
    CHECK(s.f == complex{1.1, -0.3});
    CHECK(s.fbar == complex{0.6, 0.2});
    CHECK_THAT(s.crossing_time(), WithinRel(0.0005, 1e-12));

    json missing = doc;
    missing.erase("nu");
    CHECK_THROWS(regenerator_from_json(missing));

    json bad = doc;
    bad["d"] = -2.0;
    CHECK_THROWS_AS(regenerator_from_json(bad), std::invalid_argument);
}
