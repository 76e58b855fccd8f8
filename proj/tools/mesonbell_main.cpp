// mesonbell command-line tool: probabilities, Hardy-state tables and
// inequality evaluations, efficiency-threshold scans, CHSH searches, the
// passive-record audit and Monte Carlo runs. All reports are JSON on
// stdout; file outputs are CSV/JSON as documented in the README.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mesonbell/detector.hpp"
#include "mesonbell/inequalities.hpp"
#include "mesonbell/json_io.hpp"
#include "mesonbell/lhv.hpp"
#include "mesonbell/montecarlo.hpp"
#include "mesonbell/pair.hpp"
#include "mesonbell/regen.hpp"
#include "mesonbell/state.hpp"

namespace mb = mesonbell;
using mb::json;

namespace {

int g_precision = 6;

/// Round to the configured number of significant digits for display.
double rd(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    std::ostringstream os;
    os.precision(g_precision);
    os << v;
    return std::stod(os.str());
}

json complex_out(mb::complex z) {
    return json{{"re", rd(z.real())},
                {"im", rd(z.imag())},
                {"abs", rd(std::abs(z))},
                {"phase_deg", rd(std::arg(z) * 180.0 / M_PI)}};
}

void emit(const json& report) { std::cout << report.dump(2) << "\n"; }

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty list '" + s + "'");
    return out;
}

mb::StateTag parse_tag(const std::string& s) {
    if (s == "K0" || s == "B0") return mb::StateTag::K0;
    if (s == "K0bar" || s == "B0bar") return mb::StateTag::K0bar;
    if (s == "KS") return mb::StateTag::KS;
    if (s == "KL") return mb::StateTag::KL;
    throw std::invalid_argument("unknown state tag '" + s +
                                "' (use K0, K0bar, KS, KL, B0, B0bar)");
}

struct CommonOpts {
    std::string config_file;
    std::string species = "kaon";
    double delta_m = 0.0;  // required for species b
    std::string params_file;

    double eta = 1.0, eta_bar = 1.0, eta_tau = 1.0;
    std::string scheme = "channel";
    double window = 4.8;

    double r_abs = 1.0, r_phase_deg = 180.0;  // R = -1
    std::uint64_t seed = 1;
    int threads = 1;

    json config;  // parsed --config document, if any

    void load_config() {
        if (!config_file.empty()) config = mb::load_json_file(config_file);
    }

    /// Config values act as defaults; flags given on the command line have
    /// already been written over them by the time commands run.
    template <class T>
    void seed_from_config(T& var, const char* key) const {
        if (config.is_object() && config.contains(key)) var = config[key].get<T>();
    }

    mb::MesonParams params() const {
        mb::MesonParams p;
        if (!params_file.empty()) {
            p = mb::meson_params_from_json(mb::load_json_file(params_file));
        } else if (config.is_object() && config.contains("params")) {
            p = mb::meson_params_from_json(config["params"]);
        } else {
            const mb::Species sp = mb::species_from_string(species);
            if (sp == mb::Species::Kaon) {
                p = mb::MesonParams::kaon_defaults();
            } else {
                if (!(delta_m > 0.0))
                    throw std::invalid_argument(
                        "species b requires --delta-m (mass splitting in Gamma_B units)");
                p = mb::MesonParams::b_defaults(delta_m);
            }
        }
        return p;
    }

    mb::EfficiencyModel efficiency(const mb::MesonParams& p) const {
        const mb::IdentScheme s = mb::scheme_from_string(scheme);
        if (s == mb::IdentScheme::WindowOnly)
            return mb::EfficiencyModel::window_scheme(eta, eta_bar, eta_tau, p, window);
        return mb::EfficiencyModel::make(s, eta, eta_bar, eta_tau, p);
    }

    mb::complex R() const { return mb::polar_deg(r_abs, r_phase_deg); }

    json echo(const mb::MesonParams& p) const {
        return json{{"params", mb::meson_params_to_json(p)}, {"seed", seed}};
    }
};

void add_params_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_file, "JSON config file (flags override it)");
    cmd->add_option("--species", o.species, "kaon or b");
    cmd->add_option("--delta-m", o.delta_m, "mass splitting (required for species b)");
    cmd->add_option("--params", o.params_file, "meson parameter JSON file");
}

void add_efficiency_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--eta", o.eta, "K0 detection efficiency");
    cmd->add_option("--eta-bar", o.eta_bar, "K0bar detection efficiency");
    cmd->add_option("--eta-tau", o.eta_tau, "decay-product detection efficiency");
    cmd->add_option("--scheme", o.scheme, "window, channel or ideal");
    cmd->add_option("--window", o.window, "window length for the window scheme [tau_S]");
}

void add_r_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--r-abs", o.r_abs, "|R| of the prepared state");
    cmd->add_option("--r-phase", o.r_phase_deg, "phase of R in degrees");
}

json inequality_json(const mb::InequalityReport& r) {
    json j{{"name", mb::to_string(r.name)}, {"bound", r.bound}, {"violated", r.violated}};
    if (std::isinf(r.value)) {
        j["value"] = "infinity";
        j["infinite"] = true;
    } else {
        j["value"] = rd(r.value);
        j["infinite"] = false;
    }
    return j;
}

json table_json(const mb::ProbabilityTable& t) {
    return json{{"p_k0_kbar0", rd(t.p_k0_kbar0)},   {"p_k0_kl", rd(t.p_k0_kl)},
                {"p_kl_kbar0", rd(t.p_kl_kbar0)},   {"p_ks_ks", rd(t.p_ks_ks)},
                {"p_k0_ulif", rd(t.p_k0_ulif)},     {"p_ulif_kbar0", rd(t.p_ulif_kbar0)},
                {"p_ks_kbar0", rd(t.p_ks_kbar0)},   {"p_k0_ks", rd(t.p_k0_ks)}};
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------- prob

int cmd_prob(CommonOpts& o, const std::string& single, const std::string& joint, double tau,
             double tau_l, double tau_r) {
    const mb::MesonParams p = o.params();
    json result;
    if (!single.empty()) {
        const auto arrow = single.find("->");
        if (arrow == std::string::npos)
            throw std::invalid_argument("--single expects INITIAL->FINAL, e.g. K0->KS");
        const mb::StateTag i = parse_tag(single.substr(0, arrow));
        const mb::StateTag f = parse_tag(single.substr(arrow + 2));
        result["value"] = rd(mb::transition_probability(i, f, tau, p));
        result["tau"] = tau;
        result["transition"] = single;
    } else if (!joint.empty()) {
        const auto comma = joint.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("--joint expects LEFT,RIGHT, e.g. K0,K0bar");
        const mb::StateTag l = parse_tag(joint.substr(0, comma));
        const mb::StateTag r = parse_tag(joint.substr(comma + 1));
        const double v = p.species == mb::Species::BMeson
                             ? mb::joint_probability_beauty(l, tau_l, r, tau_r, p)
                             : mb::joint_probability(l, tau_l, r, tau_r, p);
        result["value"] = rd(v);
        result["tau_l"] = tau_l;
        result["tau_r"] = tau_r;
        result["outcomes"] = joint;
    } else {
        throw std::invalid_argument("prob: one of --single or --joint is required");
    }
    emit(json{{"command", "prob"}, {"config", o.echo(p)}, {"result", result}});
    return 0;
}

// ---------------------------------------------------------------- hardy

int cmd_hardy(CommonOpts& o) {
    const mb::MesonParams p = o.params();
    const mb::EfficiencyModel eff = o.efficiency(p);
    const mb::ProbabilityTable t = mb::hardy_table(o.R(), eff, p);
    const mb::InequalityReport h = mb::eberhard_H(t);
    const mb::InequalityReport q = mb::ch_Q(t);
    json cfg = o.echo(p);
    cfg["efficiency"] = mb::efficiency_to_json(eff);
    cfg["R"] = complex_out(o.R());
    emit(json{{"command", "hardy"},
              {"config", cfg},
              {"result",
               {{"table", table_json(t)},
                {"eberhard_h", inequality_json(h)},
                {"clauser_horne_q", inequality_json(q)},
                {"violated", h.violated}}}});
    return 0;
}

// ---------------------------------------------------------------- scan

int cmd_scan(CommonOpts& o, const std::string& eta_tau_list, const std::string& relation,
             int resolution, const std::string& out_path) {
    const mb::MesonParams p = o.params();
    const std::vector<double> etas = parse_double_list(eta_tau_list);
    mb::ScanRelation rel = mb::ScanRelation::Grid;
    if (relation == "equal") rel = mb::ScanRelation::Equal;
    else if (relation == "double") rel = mb::ScanRelation::EtaBarDouble;
    else if (relation != "grid")
        throw std::invalid_argument("scan: --relation must be equal, double or grid");

    const mb::ThresholdScan scan =
        mb::threshold_scan(etas, rel, resolution, p, mb::scheme_from_string(o.scheme), o.R());

    std::ostringstream csv;
    mb::write_scan_csv(scan, csv);
    if (!out_path.empty()) write_text_file(out_path, csv.str());

    json points = json::array();
    for (const auto& pt : scan.points) {
        if (rel == mb::ScanRelation::Grid && !pt.found) continue;
        points.push_back(json{{"eta_tau", pt.eta_tau},
                              {"eta", pt.found ? json(rd(pt.eta)) : json()},
                              {"eta_bar", rd(pt.eta_bar)},
                              {"found", pt.found}});
    }
    json cfg = o.echo(p);
    cfg["relation"] = relation;
    cfg["eta_tau"] = etas;
    cfg["resolution"] = resolution;
    cfg["scheme"] = o.scheme;
    json result{{"points", points}};
    if (!out_path.empty()) result["csv"] = out_path;
    emit(json{{"command", "scan"}, {"config", cfg}, {"result", result}});
    std::cerr << "scan: " << scan.points.size() << " boundary points"
              << (out_path.empty() ? "" : " -> " + out_path) << "\n";
    return 0;
}

// ---------------------------------------------------------------- chsh

int cmd_chsh(CommonOpts& o, bool search, const std::string& times, double t_max, double step,
             bool no_polish, bool no_decay) {
    mb::MesonParams p = o.params();
    if (no_decay) {
        p.gamma_S = 0.0;
        p.gamma_L = 0.0;
    }
    json cfg = o.echo(p);
    cfg["no_decay"] = no_decay;
    if (!times.empty()) {
        const auto ts = parse_double_list(times);
        if (ts.size() != 4) throw std::invalid_argument("chsh: --times needs t1,t2,t3,t4");
        const mb::InequalityReport r = mb::chsh_report(ts[0], ts[1], ts[2], ts[3], p);
        emit(json{{"command", "chsh"},
                  {"config", cfg},
                  {"result", {{"times", ts}, {"chsh", inequality_json(r)}}}});
        return 0;
    }
    if (!search) throw std::invalid_argument("chsh: pass --search or --times");
    const mb::ChshSearchResult r = mb::chsh_search(p, t_max, step, !no_polish);
    cfg["t_max"] = t_max;
    cfg["step"] = step;
    emit(json{{"command", "chsh"},
              {"config", cfg},
              {"result",
               {{"max_abs_s", rd(r.max_value)},
                {"argmax_times", {rd(r.times[0]), rd(r.times[1]), rd(r.times[2]), rd(r.times[3])}},
                {"grid_sup_with_coincident_settings", rd(r.grid_sup)},
                {"violated", r.violated}}}});
    return 0;
}

// ---------------------------------------------------------------- wigner

int cmd_wigner(CommonOpts& o, double eps_abs, double eps_phase_deg, bool eps_given) {
    const mb::MesonParams p = o.params();
    const mb::complex eps =
        eps_given ? mb::polar_deg(eps_abs, eps_phase_deg) : p.epsilon;
    const mb::WignerReport w = mb::wigner_uchiyama(eps);
    json cfg = o.echo(p);
    cfg["epsilon"] = complex_out(eps);
    emit(json{{"command", "wigner"},
              {"config", cfg},
              {"result",
               {{"p_lifetime_flavour", rd(w.p_lifetime_flavour)},
                {"p_lifetime_cp", rd(w.p_lifetime_cp)},
                {"p_cp_flavour", rd(w.p_cp_flavour)},
                {"re_eps", rd(w.re_eps)},
                {"abs_eps_sq", rd(w.abs_eps_sq)},
                {"wigner", inequality_json(w.report)},
                {"violated", w.report.violated}}}});
    return 0;
}

// ---------------------------------------------------------------- regen

int cmd_regen(CommonOpts& o, const std::string& spec_file, bool r_given, double flight_time,
              double delta_tau, double beta_opt, bool beta_given) {
    const mb::MesonParams p = o.params();
    json result;
    mb::complex r;
    if (!spec_file.empty()) {
        const mb::RegeneratorSpec spec = mb::regenerator_from_json(mb::load_json_file(spec_file));
        r = mb::regeneration_parameter(spec);
        result["crossing_time"] = rd(spec.crossing_time());
    } else if (r_given) {
        // interpret --r-abs/--r-phase as the regeneration parameter r
        r = o.R();
    } else {
        throw std::invalid_argument("regen: pass --from-spec FILE or --r-abs/--r-phase");
    }
    result["r"] = complex_out(r);
    const mb::complex R = mb::effective_R(r, flight_time, p);
    result["flight_time"] = flight_time;
    result["R"] = complex_out(R);
    const mb::PairState state = mb::hardy_state(R);
    result["state_weights"] = json{{"ks_kl", rd(std::norm(state.coeffs[0][1]))},
                                   {"kl_ks", rd(std::norm(state.coeffs[1][0]))},
                                   {"kl_kl", rd(std::norm(state.coeffs[1][1]))}};
    if (std::abs(r) > 0.0 && std::abs(r) < 1.0 && p.delta_gamma() < 0.0) {
        const mb::HardyPreparationSolution prep = mb::hardy_preparation_time(r, p);
        result["hardy_preparation"] = json{{"T", rd(prep.T)},
                                           {"R", complex_out(prep.R)},
                                           {"phase_residual_deg",
                                            rd(prep.phase_residual * 180.0 / M_PI)}};
    }
    const double beta = beta_given ? beta_opt : p.beta;
    if (delta_tau > 0.0)
        result["min_separation_time"] = rd(mb::min_separation_time(delta_tau, beta));
    json cfg = o.echo(p);
    cfg["beta"] = beta;
    emit(json{{"command", "regen"}, {"config", cfg}, {"result", result}});
    return 0;
}

// ---------------------------------------------------------------- lhv

int cmd_lhv(CommonOpts& o, std::uint64_t n, int grid, double t_max,
            const std::string& events_path, const std::string& out_path) {
    const mb::MesonParams p = o.params();
    const mb::LhvReport rep = mb::lhv_vs_qm_report(n, p, o.seed, grid, t_max);
    json cfg = o.echo(p);
    cfg["n"] = n;
    cfg["grid"] = grid;
    const json result{
        {"n", rep.n},
        {"grid", rep.grid},
        {"max_abs_z", rd(rep.max_abs_z)},
        {"bins_tested", rep.bins_tested},
        {"densities_ok", rep.densities_ok},
        {"ks_scaled", rd(rep.ks_scaled)},
        {"ks_threshold", rep.ks_threshold},
        {"marginal_ok", rep.marginal_ok},
        {"windows",
         {{"left", {rd(rep.windows.left_a), rd(rep.windows.left_b)}},
          {"right", {rd(rep.windows.right_a), rd(rep.windows.right_b)}},
          {"halfwidth", rep.windows.halfwidth}}},
        {"chsh_lhv", rd(rep.chsh_lhv)},
        {"chsh_lhv_sigma", rd(rep.chsh_lhv_sigma)},
        {"chsh_qm", rd(rep.chsh_qm)},
        {"chsh_agrees", rep.chsh_agrees},
        {"nongenuine_violated", rep.nongenuine_violated},
        {"equal_time_same_flavour_fraction", rd(rep.equal_time_same_flavour_fraction)},
        {"agreement", rep.ok}};
    const json report{{"command", "lhv"}, {"config", cfg}, {"result", result}};
    if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
    emit(report);
    if (!events_path.empty()) {
        mb::KasdaySampler sampler(p, o.seed);
        std::vector<mb::HiddenRecord> records;
        records.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) records.push_back(sampler.next());
        std::ostringstream csv;
        mb::write_lhv_events_csv(records, sampler, csv);
        write_text_file(events_path, csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------- mc

int cmd_mc(CommonOpts& o, std::uint64_t n, const std::string& policy_str,
           const std::string& out_dir, bool no_events) {
    const mb::MesonParams p = o.params();
    const mb::EfficiencyModel eff = o.efficiency(p);
    mb::SettingPolicy policy = mb::SettingPolicy::random();
    if (policy_str != "random") {
        if (policy_str.size() != 8 || policy_str.rfind("fixed-", 0) != 0)
            throw std::invalid_argument("mc: --policy is random or fixed-XY with X,Y in {S,L}");
        auto side = [](char c) {
            if (c == 'S') return mb::Setting::Strangeness;
            if (c == 'L') return mb::Setting::Lifetime;
            throw std::invalid_argument("mc: policy sides must be S or L");
        };
        policy = mb::SettingPolicy::fixed(side(policy_str[6]), side(policy_str[7]));
    }
    const bool keep = !no_events && !out_dir.empty();
    const mb::EventLog log =
        mb::generate_events(o.R(), eff, p, policy, n, o.seed, keep, o.threads);

    json cfg = o.echo(p);
    cfg["efficiency"] = mb::efficiency_to_json(eff);
    cfg["R"] = complex_out(o.R());
    cfg["n"] = n;
    cfg["policy"] = policy.name();
    cfg["threads"] = o.threads;
    json result;
    json counts = json::array();
    static const char* sp_names[4] = {"SS", "SL", "LS", "LL"};
    for (int sp = 0; sp < 4; ++sp) {
        if (log.setting_pair_totals[sp] == 0) continue;
        json block{{"setting_pair", sp_names[sp]}, {"n", log.setting_pair_totals[sp]}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (log.counts[sp][i][j] > 0) {
                    const mb::Setting sl = sp & 2 ? mb::Setting::Lifetime : mb::Setting::Strangeness;
                    const mb::Setting sr = sp & 1 ? mb::Setting::Lifetime : mb::Setting::Strangeness;
                    block["counts"][mb::outcome_label(sl, i) + std::string(",") +
                                    mb::outcome_label(sr, j)] = log.counts[sp][i][j];
                }
        counts.push_back(block);
    }
    result["counts"] = counts;
    if (policy.kind == mb::SettingPolicy::Kind::Random5050) {
        const mb::InequalityEstimates est = mb::estimate_inequalities(log);
        result["h"] = json{{"value", rd(est.H.value)}, {"sigma", rd(est.H.sigma)},
                           {"violated", est.H.violated}};
        result["q"] = json{{"value", rd(est.Q.value)}, {"sigma", rd(est.Q.sigma)},
                           {"violated", est.Q.violated}};
        result["table"] = table_json(est.table);
    }
    const json report{{"command", "mc"}, {"config", cfg}, {"result", result}};

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        write_text_file((dir / "meta.json").string(), cfg.dump(2) + "\n");
        write_text_file((dir / "estimates.json").string(), report.dump(2) + "\n");
        if (keep) {
            std::ostringstream csv;
            mb::write_events_csv(log, csv);
            write_text_file((dir / "events.csv").string(), csv.str());
        }
    }
    emit(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-type tests with entangled neutral meson pairs"};
    app.require_subcommand(1);
    app.add_option("--precision", g_precision, "significant digits in reports")
        ->capture_default_str();

    CommonOpts o;

    auto* prob = app.add_subcommand("prob", "single and joint detection probabilities");
    std::string single, joint;
    double tau = 0.0, tau_l = 0.0, tau_r = 0.0;
    add_params_opts(prob, o);
    prob->add_option("--single", single, "transition INITIAL->FINAL");
    prob->add_option("--joint", joint, "joint outcomes LEFT,RIGHT");
    prob->add_option("--tau", tau, "proper time [tau_S]");
    prob->add_option("--tau-l", tau_l, "left proper time");
    prob->add_option("--tau-r", tau_r, "right proper time");

    auto* hardy = app.add_subcommand("hardy", "Hardy-state probability table, H and Q");
    add_params_opts(hardy, o);
    add_efficiency_opts(hardy, o);
    add_r_opts(hardy, o);

    auto* scan = app.add_subcommand("scan", "efficiency-threshold boundary curves");
    std::string eta_tau_list = "1,0.99,0.98,0.97", relation = "grid", scan_out;
    int resolution = 100;
    add_params_opts(scan, o);
    scan->add_option("--eta-tau", eta_tau_list, "comma list of eta_tau values");
    scan->add_option("--relation", relation, "equal, double or grid");
    scan->add_option("--resolution", resolution, "grid points per curve");
    scan->add_option("--out", scan_out, "CSV output path");
    scan->add_option("--scheme", o.scheme, "identification scheme");
    add_r_opts(scan, o);

    auto* chsh = app.add_subcommand("chsh", "two-time CHSH combination");
    bool search = false, no_polish = false, no_decay = false;
    std::string times;
    double t_max = 10.0, step = 0.05;
    add_params_opts(chsh, o);
    chsh->add_flag("--search", search, "grid + local search for the maximum");
    chsh->add_option("--times", times, "evaluate at t1,t2,t3,t4");
    chsh->add_option("--t-max", t_max, "search box edge [tau_S]");
    chsh->add_option("--step", step, "grid step [tau_S]");
    chsh->add_flag("--no-polish", no_polish, "skip the local refinement");
    chsh->add_flag("--no-decay", no_decay, "control run with both widths zero");

    auto* wigner = app.add_subcommand("wigner", "Wigner-like test on the CP mixing parameter");
    double eps_abs = 2.284e-3, eps_phase_deg = 0.0;
    add_params_opts(wigner, o);
    auto* eps_abs_opt = wigner->add_option("--eps-abs", eps_abs, "|epsilon|");
    auto* eps_phase_opt =
        wigner->add_option("--eps-phase", eps_phase_deg, "phase of epsilon in degrees");

    auto* regen = app.add_subcommand("regen", "regeneration parameter and prepared state");
    std::string spec_file;
    double flight_time = 0.0, delta_tau = 0.0, beta_opt = 0.22;
    add_params_opts(regen, o);
    add_r_opts(regen, o);
    regen->add_option("--from-spec", spec_file, "regenerator JSON file");
    regen->add_option("--flight-time", flight_time, "free flight T [tau_S]");
    regen->add_option("--delta-tau", delta_tau, "lifetime window for T_min");
    auto* beta_o = regen->add_option("--beta", beta_opt, "meson velocity / c");

    auto* lhv = app.add_subcommand("lhv", "passive-record sampler audit");
    lhv->alias("lhv-check");
    std::uint64_t lhv_n = 1000000;
    int lhv_grid = 50;
    double lhv_t_max = 0.0;
    std::string lhv_events, lhv_out;
    add_params_opts(lhv, o);
    lhv->add_option("--n", lhv_n, "number of records");
    lhv->add_option("--seed", o.seed, "RNG seed");
    lhv->add_option("--grid", lhv_grid, "density-comparison grid");
    lhv->add_option("--t-max", lhv_t_max, "histogram time range");
    lhv->add_option("--events", lhv_events, "write records CSV here");
    lhv->add_option("--out", lhv_out, "write the JSON report here");

    auto* mc = app.add_subcommand("mc", "Monte Carlo Hardy test");
    std::uint64_t mc_n = 1000000;
    std::string policy = "random", mc_out;
    bool no_events = false;
    add_params_opts(mc, o);
    add_efficiency_opts(mc, o);
    add_r_opts(mc, o);
    mc->add_option("--n", mc_n, "number of pairs");
    mc->add_option("--seed", o.seed, "RNG seed");
    mc->add_option("--policy", policy, "random or fixed-XY (X,Y in {S,L})");
    mc->add_option("--out", mc_out, "output directory");
    mc->add_flag("--no-events", no_events, "do not persist per-event records");
    mc->add_option("--threads", o.threads, "worker threads (deterministic result)");

    // The config file supplies defaults; flags parsed afterwards override.
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a.rfind("--config=", 0) == 0) o.config_file = a.substr(9);
        else if (a == "--config" && i + 1 < argc) o.config_file = argv[i + 1];
    }
    try {
        o.load_config();
        o.seed_from_config(o.species, "species");
        o.seed_from_config(o.delta_m, "delta_m");
        o.seed_from_config(o.eta, "eta");
        o.seed_from_config(o.eta_bar, "eta_bar");
        o.seed_from_config(o.eta_tau, "eta_tau");
        o.seed_from_config(o.scheme, "scheme");
        o.seed_from_config(o.window, "window");
        o.seed_from_config(o.r_abs, "r_abs");
        o.seed_from_config(o.r_phase_deg, "r_phase");
        o.seed_from_config(o.seed, "seed");
        o.seed_from_config(o.threads, "threads");
        o.seed_from_config(lhv_n, "n");
        o.seed_from_config(mc_n, "n");
        o.seed_from_config(policy, "policy");
        o.seed_from_config(g_precision, "precision");
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (prob->parsed()) return cmd_prob(o, single, joint, tau, tau_l, tau_r);
        if (hardy->parsed()) return cmd_hardy(o);
        if (scan->parsed()) return cmd_scan(o, eta_tau_list, relation, resolution, scan_out);
        if (chsh->parsed()) return cmd_chsh(o, search, times, t_max, step, no_polish, no_decay);
        if (wigner->parsed())
            return cmd_wigner(o, eps_abs, eps_phase_deg,
                              eps_abs_opt->count() > 0 || eps_phase_opt->count() > 0);
        if (regen->parsed())
            return cmd_regen(o, spec_file, regen->count("--r-abs") > 0 || regen->count("--r-phase") > 0,
                             flight_time, delta_tau, beta_opt, beta_o->count() > 0);
        if (lhv->parsed()) return cmd_lhv(o, lhv_n, lhv_grid, lhv_t_max, lhv_events, lhv_out);
        if (mc->parsed()) return cmd_mc(o, mc_n, policy, mc_out, no_events);
        throw std::invalid_argument("no subcommand given");
    } catch (const mb::quadrature_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const mb::sampling_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
