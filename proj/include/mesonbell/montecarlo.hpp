#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesonbell/detector.hpp"
#include "mesonbell/inequalities.hpp"
#include "mesonbell/rng.hpp"

namespace mesonbell {

enum class Setting { Strangeness, Lifetime };

inline std::string to_string(Setting s) {
    return s == Setting::Strangeness ? "S" : "L";
}

/// Side-local outcome label. For a strangeness setting the local outcome
/// index maps to {K0, K0bar, Undetected}; for a lifetime setting to
/// {KS-tag, KL-tag, Undetected}.
inline std::string outcome_label(Setting s, int local) {
    static const char* strangeness[3] = {"K0", "K0bar", "U"};
    static const char* lifetime[3] = {"KS", "KL", "U"};
    return s == Setting::Strangeness ? strangeness[local] : lifetime[local];
}

struct SettingPolicy {
    enum class Kind { Random5050, Fixed } kind = Kind::Random5050;
    Setting fixed_l = Setting::Strangeness;
    Setting fixed_r = Setting::Strangeness;

    static SettingPolicy random() { return {}; }
    static SettingPolicy fixed(Setting l, Setting r) {
        return {Kind::Fixed, l, r};
    }
    std::string name() const {
        if (kind == Kind::Random5050) return "random-50/50";
        return "fixed-" + to_string(fixed_l) + to_string(fixed_r);
    }
};

struct EventLogMeta {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    complex R{-1.0, 0.0};
    EfficiencyModel eff;
    std::string policy;
    Species species = Species::Kaon;
};

/// Aggregated joint-outcome counts, indexed [setting pair][local_l][local_r]
/// with setting pairs ordered (SS, SL, LS, LL). Per-event records are kept
/// only on request (packed as setting-pair/outcome indices, in generation
/// order).
struct EventLog {
    EventLogMeta meta;
    std::array<std::array<std::array<std::uint64_t, 3>, 3>, 4> counts{};
    std::uint64_t setting_pair_totals[4] = {0, 0, 0, 0};
    std::vector<std::uint8_t> events;  // (sp << 4) | (ol << 2) | orr, if kept
    bool events_kept = false;
};

namespace detail {

struct SettingPairDistribution {
    // cumulative probabilities over the 9 outcome cells, row-major
    std::array<double, 9> cum{};
};

inline std::array<SettingPairDistribution, 4> build_distributions(const OutcomeModel& m) {
    const std::array<const std::array<std::array<double, 3>, 3>*, 4> blocks = {
        &m.ss, &m.sl, &m.ls, &m.ll};
    std::array<SettingPairDistribution, 4> dists;
    for (int sp = 0; sp < 4; ++sp) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double p = (*blocks[sp])[i][j];
                if (p < -1e-12)
                    throw std::logic_error("generate_events: negative outcome probability");
                dists[sp].cum[i * 3 + j] = (acc += std::max(0.0, p));
            }
        if (std::abs(acc - 1.0) > 1e-9)
            throw std::logic_error(
                "generate_events: outcome probabilities sum to " + std::to_string(acc) +
                " for setting pair " + std::to_string(sp));
        dists[sp].cum[8] = 1.0;
    }
    return dists;
}

} // namespace detail

/// Pair-by-pair simulation of the active Hardy test: independent setting
/// choices per side, then a joint outcome drawn from the corresponding
/// conditional distribution. Deterministic for a fixed seed independently
/// of thread count: events are generated in fixed-size blocks with
/// per-block derived streams.
inline EventLog generate_events(complex R, const EfficiencyModel& eff, const MesonParams& p,
                                SettingPolicy policy, std::uint64_t n, std::uint64_t seed,
                                bool keep_events = false, int threads = 1) {
    if (n == 0) throw std::invalid_argument("generate_events: n must be > 0");
    const auto dists = detail::build_distributions(outcome_model(R, eff, p));

    EventLog log;
    log.meta = {n, seed, R, eff, policy.name(), p.species};
    log.events_kept = keep_events;
    if (keep_events) log.events.resize(n);

    constexpr std::uint64_t kBlock = 1 << 16;
    const std::uint64_t n_blocks = (n + kBlock - 1) / kBlock;

    struct BlockCounts {
        std::array<std::array<std::array<std::uint64_t, 3>, 3>, 4> counts{};
        std::uint64_t totals[4] = {0, 0, 0, 0};
    };

    auto run_block = [&](std::uint64_t block, BlockCounts& out) {
        auto rng = make_stream(seed, block);
        const std::uint64_t begin = block * kBlock;
        const std::uint64_t end = std::min(n, begin + kBlock);
        for (std::uint64_t e = begin; e < end; ++e) {
            Setting sl = policy.fixed_l, sr = policy.fixed_r;
            if (policy.kind == SettingPolicy::Kind::Random5050) {
                const std::uint64_t bits = rng();
                sl = (bits & 1) ? Setting::Lifetime : Setting::Strangeness;
                sr = (bits & 2) ? Setting::Lifetime : Setting::Strangeness;
            }
            const int sp = (sl == Setting::Lifetime ? 2 : 0) + (sr == Setting::Lifetime ? 1 : 0);
            const double u = std::generate_canonical<double, 53>(rng);
            int cell = 0;
            while (cell < 8 && u > dists[sp].cum[cell]) ++cell;
            const int ol = cell / 3, orr = cell % 3;
            ++out.counts[sp][ol][orr];
            ++out.totals[sp];
            if (keep_events)
                log.events[e] = static_cast<std::uint8_t>((sp << 4) | (ol << 2) | orr);
        }
    };

    const int nthreads = std::max(1, threads);
    if (nthreads == 1 || n_blocks == 1) {
        BlockCounts total;
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b, total);
        log.counts = total.counts;
        for (int sp = 0; sp < 4; ++sp) log.setting_pair_totals[sp] = total.totals[sp];
    } else {
        std::vector<std::future<BlockCounts>> futures;
        for (int t = 0; t < nthreads; ++t)
            futures.push_back(std::async(std::launch::async, [&, t] {
                BlockCounts mine;
                for (std::uint64_t b = t; b < n_blocks; b += nthreads) run_block(b, mine);
                return mine;
            }));
        for (auto& f : futures) {
            const BlockCounts mine = f.get();
            for (int sp = 0; sp < 4; ++sp) {
                log.setting_pair_totals[sp] += mine.totals[sp];
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) log.counts[sp][i][j] += mine.counts[sp][i][j];
            }
        }
    }
    return log;
}

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
    bool violated = false;
};

struct InequalityEstimates {
    Estimate H;
    Estimate Q;
    ProbabilityTable table;  // empirical conditional probabilities
};

namespace detail {

/// Multinomial delta-method variance: for each setting-pair block with
/// gradient g over its cells, Var += (sum g^2 p - (sum g p)^2) / n_block.
struct GradientCell {
    int sp, ol, orr;
    double g;
};

inline double sandwich_variance(const EventLog& log,
                                const std::array<std::array<std::array<double, 3>, 3>, 4>& phat,
                                const std::vector<GradientCell>& cells) {
    double var = 0.0;
    for (int sp = 0; sp < 4; ++sp) {
        if (log.setting_pair_totals[sp] == 0) continue;
        double s2 = 0.0, s1 = 0.0;
        for (const auto& c : cells) {
            if (c.sp != sp) continue;
            const double p = phat[sp][c.ol][c.orr];
            s2 += c.g * c.g * p;
            s1 += c.g * p;
        }
        var += (s2 - s1 * s1) / static_cast<double>(log.setting_pair_totals[sp]);
    }
    return var;
}

} // namespace detail

/// Empirical probability table (conditional on setting pairs) and the H
/// and Q values with delta-method standard errors.
inline InequalityEstimates estimate_inequalities(const EventLog& log) {
    std::string missing;
    for (int sp = 0; sp < 4; ++sp)
        if (log.setting_pair_totals[sp] == 0) {
            static const char* names[4] = {"(S,S)", "(S,L)", "(L,S)", "(L,L)"};
            missing += missing.empty() ? names[sp] : std::string(" ") + names[sp];
        }
    if (!missing.empty())
        throw std::invalid_argument("estimate_inequalities: missing setting pairs: " + missing);

    std::array<std::array<std::array<double, 3>, 3>, 4> phat{};
    for (int sp = 0; sp < 4; ++sp)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                phat[sp][i][j] = static_cast<double>(log.counts[sp][i][j]) /
                                 static_cast<double>(log.setting_pair_totals[sp]);

    ProbabilityTable t;
    t.p_k0_kbar0 = phat[0][0][1];
    t.p_k0_ks = phat[1][0][0];
    t.p_k0_kl = phat[1][0][1];
    t.p_k0_ulif = phat[1][0][2];
    t.p_ks_kbar0 = phat[2][0][1];
    t.p_kl_kbar0 = phat[2][1][1];
    t.p_ulif_kbar0 = phat[2][2][1];
    t.p_ks_ks = phat[3][0][0];

    InequalityEstimates est;
    est.table = t;

    const InequalityReport h = eberhard_H(t);
    const double hd = t.p_k0_kl + t.p_ks_ks + t.p_kl_kbar0 + t.p_k0_ulif + t.p_ulif_kbar0;
    est.H.value = h.value;
    est.H.violated = h.violated;
    if (hd > 0.0) {
        const double gA = 1.0 / hd;
        const double gD = -t.p_k0_kbar0 / (hd * hd);
        est.H.sigma = std::sqrt(detail::sandwich_variance(
            log, phat,
            {{0, 0, 1, gA}, {1, 0, 1, gD}, {1, 0, 2, gD}, {2, 1, 1, gD}, {2, 2, 1, gD},
             {3, 0, 0, gD}}));
    }

    const InequalityReport q = ch_Q(t);
    est.Q.value = q.value;
    est.Q.violated = q.violated;
    const double qn = t.p_ks_kbar0 - t.p_ks_ks + t.p_k0_kbar0 + t.p_k0_ks;
    const double qd = (t.p_k0_ks + t.p_k0_kl + t.p_k0_ulif) +
                      (t.p_kl_kbar0 + t.p_ks_kbar0 + t.p_ulif_kbar0);
    {
        const double num_only = 1.0 / qd;                    // in numerator only
        const double den_only = -qn / (qd * qd);             // in denominator only
        const double both = (qd - qn) / (qd * qd);           // in both
        est.Q.sigma = std::sqrt(detail::sandwich_variance(
            log, phat,
            {{2, 0, 1, both},      // p_ks_kbar0
             {3, 0, 0, -num_only}, // p_ks_ks (numerator, negative)
             {0, 0, 1, num_only},  // p_k0_kbar0
             {1, 0, 0, both},      // p_k0_ks
             {1, 0, 1, den_only},  // p_k0_kl
             {1, 0, 2, den_only},  // p_k0_ulif
             {2, 1, 1, den_only},  // p_kl_kbar0
             {2, 2, 1, den_only}}));
    }
    return est;
}

/// Event rows `setting_l,setting_r,outcome_l,outcome_r` in generation order.
inline void write_events_csv(const EventLog& log, std::ostream& os) {
    if (!log.events_kept)
        throw std::logic_error("write_events_csv: log was generated without per-event records");
    os << "setting_l,setting_r,outcome_l,outcome_r\n";
    for (const std::uint8_t e : log.events) {
        const int sp = e >> 4, ol = (e >> 2) & 3, orr = e & 3;
        const Setting sl = sp & 2 ? Setting::Lifetime : Setting::Strangeness;
        const Setting sr = sp & 1 ? Setting::Lifetime : Setting::Strangeness;
        os << to_string(sl) << ',' << to_string(sr) << ',' << outcome_label(sl, ol) << ','
           << outcome_label(sr, orr) << '\n';
    }
}

} // namespace mesonbell
