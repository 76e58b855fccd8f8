#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mesonbell/detector.hpp"
#include "mesonbell/params.hpp"
#include "mesonbell/regen.hpp"

namespace mesonbell {

using json = nlohmann::json;

inline json to_json(complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline complex complex_from_json(const json& j, const std::string& what) {
    if (j.is_number()) return complex{j.get<double>(), 0.0};
    if (j.is_object()) {
        if (j.contains("re") || j.contains("im"))
            return complex{j.value("re", 0.0), j.value("im", 0.0)};
        if (j.contains("abs"))
            return polar_deg(j["abs"].get<double>(), j.value("phase_deg", 0.0));
    }
    throw std::invalid_argument(what + ": expected number, {re, im} or {abs, phase_deg}");
}

inline Species species_from_string(const std::string& s) {
    if (s == "kaon" || s == "k") return Species::Kaon;
    if (s == "bmeson" || s == "b") return Species::BMeson;
    throw std::invalid_argument("unknown species '" + s + "' (use kaon or b)");
}

/// Builds MesonParams from a JSON document. Keys mirror the field names;
/// missing keys fall back to the species defaults. B-meson documents must
/// carry delta_m.
inline MesonParams meson_params_from_json(const json& j) {
    const Species sp = species_from_string(j.value("species", std::string("kaon")));
    MesonParams p;
    if (sp == Species::Kaon) {
        p = MesonParams::kaon_defaults();
    } else {
        if (!j.contains("delta_m"))
            throw std::invalid_argument("B-meson parameters require delta_m");
        p = MesonParams::b_defaults(j["delta_m"].get<double>());
    }
    if (j.contains("gamma_s")) p.gamma_S = j["gamma_s"].get<double>();
    if (j.contains("gamma_l")) p.gamma_L = j["gamma_l"].get<double>();
    if (j.contains("delta_m")) p.delta_m = j["delta_m"].get<double>();
    if (j.contains("epsilon")) p.epsilon = complex_from_json(j["epsilon"], "epsilon");
    if (j.contains("beta")) p.beta = j["beta"].get<double>();
    if (j.contains("br")) {
        const json& b = j["br"];
        p.br.kl_pilnu = b.value("kl_pilnu", p.br.kl_pilnu);
        p.br.kl_pipi = b.value("kl_pipi", p.br.kl_pipi);
        p.br.ks_pilnu = b.value("ks_pilnu", p.br.ks_pilnu);
        p.br.ks_pipi = b.value("ks_pipi", p.br.ks_pipi);
    }
    p.validate();
    return p;
}

inline json meson_params_to_json(const MesonParams& p) {
    return json{{"species", to_string(p.species)},
                {"gamma_s", p.gamma_S},
                {"gamma_l", p.gamma_L},
                {"delta_m", p.delta_m},
                {"epsilon", to_json(p.epsilon)},
                {"br",
                 {{"kl_pilnu", p.br.kl_pilnu},
                  {"kl_pipi", p.br.kl_pipi},
                  {"ks_pilnu", p.br.ks_pilnu},
                  {"ks_pipi", p.br.ks_pipi}}},
                {"beta", p.beta}};
}

inline IdentScheme scheme_from_string(const std::string& s) {
    if (s == "window") return IdentScheme::WindowOnly;
    if (s == "channel") return IdentScheme::WindowPlusChannel;
    if (s == "ideal") return IdentScheme::Ideal;
    throw std::invalid_argument("unknown scheme '" + s + "' (use window, channel or ideal)");
}

/// p_S and p_L are always derived from the scheme; documents carrying them
/// explicitly are rejected rather than silently ignored.
inline EfficiencyModel efficiency_from_json(const json& j, const MesonParams& p) {
    if (j.contains("p_s") || j.contains("p_l") || j.contains("p_S") || j.contains("p_L"))
        throw std::invalid_argument(
            "efficiency model: p_S/p_L are derived from the scheme; remove them");
    const IdentScheme scheme = scheme_from_string(j.value("scheme", std::string("channel")));
    const double eta = j.value("eta", 1.0);
    const double eta_bar = j.value("eta_bar", 1.0);
    const double eta_tau = j.value("eta_tau", 1.0);
    if (scheme == IdentScheme::WindowOnly)
        return EfficiencyModel::window_scheme(eta, eta_bar, eta_tau, p, j.value("window", 4.8));
    if (scheme == IdentScheme::WindowPlusChannel)
        return EfficiencyModel::channel_scheme(eta, eta_bar, eta_tau, p);
    return EfficiencyModel::ideal(eta, eta_bar);
}

inline json efficiency_to_json(const EfficiencyModel& e) {
    return json{{"eta", e.eta},          {"eta_bar", e.eta_bar}, {"eta_tau", e.eta_tau},
                {"p_s", e.p_S},          {"p_l", e.p_L},         {"scheme", to_string(e.scheme)},
                {"window", e.window}};
}

inline RegeneratorSpec regenerator_from_json(const json& j) {
    RegeneratorSpec s;
    s.f = complex_from_json(j.at("f"), "f");
    s.fbar = complex_from_json(j.at("fbar"), "fbar");
    s.nu = j.at("nu").get<double>();
    s.d = j.at("d").get<double>();
    s.p_K = j.at("p_k").get<double>();
    s.m_K = j.at("m_k").get<double>();
    s.validate();
    return s;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

} // namespace mesonbell
