// Acceptance gate: one criterion per line, pass/fail, with the tolerances
// pinned in code.  Run with no argument for the full battery or with a
// criterion id (A01..A13) for a single row.

#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nmext/dlog.hpp"
#include "nmext/harness.hpp"
#include "nmext/sweeps.hpp"

using namespace nmext;
using ff::u64;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

Outcome from_report(const json& rep, const std::string& extra = "") {
    Outcome oc;
    const json& s = rep.at("summary");
    oc.ok = s.at("all_pass").get<bool>();
    std::ostringstream os;
    os << s.at("cells").get<std::size_t>() << " cells, " << s.at("violations").get<std::size_t>()
       << " violations";
    if (!extra.empty()) os << ", " << extra;
    oc.detail = os.str();
    return oc;
}

double worst_ratio(const json& rep, const char* num, const char* den) {
    double worst = 0.0;
    for (const json& c : rep.at("cells")) {
        double b = c.at(den).get<double>();
        if (b > 0.0) worst = std::max(worst, c.at(num).get<double>() / b);
    }
    return worst;
}

// --- protocol contexts shared by A08..A10 -----------------------------------

const protocol::ProtocolContext& single_ctx() {
    static protocol::ProtocolContext ctx = [] {
        auto p = protocol::derive_params(96, 0.25, 0.0625, 0, false);
        protocol::set_tag_length(p, 10);
        return protocol::build_context(p, protocol::Figure::One);
    }();
    return ctx;
}

const protocol::ProtocolContext& phased_ctx() {
    static protocol::ProtocolContext ctx = [] {
        auto p = protocol::derive_params(96, 0.25, 0.25, 1, false);
        return protocol::build_context(p, protocol::Figure::Two);
    }();
    return ctx;
}

harness::TrialBatch run_batch(const protocol::ProtocolContext& ctx, const std::string& strat,
                              json cfg, u64 trials, u64 seed) {
    harness::TrialConfig tc;
    tc.strategy = strat;
    tc.strategy_cfg = std::move(cfg);
    tc.source.k = 8;
    tc.trials = trials;
    tc.seed = seed;
    return harness::run_trials(ctx, tc);
}

// --- criteria ---------------------------------------------------------------

Outcome a01_uniform_charsums() {
    json rep = sweeps::charsum_sweep(101, 424242);
    return from_report(rep,
                       "max theta/bound " + fmt(worst_ratio(rep, "theta", "uniform_bound")));
}

Outcome a02_weak_charsums() {
    json rep = sweeps::charsum_weak_sweep(101, {1, 2, 3}, 424242);
    return from_report(rep);
}

Outcome a03_complete_sums() {
    json rep = sweeps::weil_sweep({5, 7, 11, 13});
    return from_report(rep, "max sum/bound " + fmt(worst_ratio(rep, "sum_abs", "bound")));
}

Outcome a04_headline_distance() {
    json rep = sweeps::nm_flagship();
    const json& cell = rep.at("cells").at(0);
    double delta = cell.at("delta").get<double>();
    double bound = cell.at("bound").get<double>();
    bool pinned = std::fabs(delta - 0.009086629) <= 1e-8;
    bool sane_bound = bound > 0.70 && bound < 0.71;
    Outcome oc;
    oc.ok = rep.at("summary").at("all_pass").get<bool>() && pinned && sane_bound;
    oc.detail = "delta " + fmt(delta) + " vs bound " + fmt(bound);
    return oc;
}

Outcome a05_subgroup_dlogs() {
    std::vector<u64> primes{17, 97, 113, 193, 241, 257};
    u64 checked = 0;
    for (u64 q : primes) {
        u64 g = ff::find_generator(q, ff::factorize(q - 1));
        std::vector<u64> table = dlog::dlog_table(q, g);
        std::uint32_t v2 = 0;
        for (u64 r = q - 1; r % 2 == 0; r /= 2) ++v2;
        for (std::uint32_t m = 1; m <= v2; ++m) {
            ff::FieldCtx ctx = ff::make_field_ctx(q, m);
            u64 mask = (u64(1) << m) - 1;
            for (u64 z = 1; z < q; ++z) {
                if (dlog::dlog_pow2(z, ctx) != (table[z] & mask)) {
                    Outcome oc;
                    oc.detail = "mismatch at q=" + std::to_string(q) + " m=" + std::to_string(m) +
                                " z=" + std::to_string(z);
                    return oc;
                }
                ++checked;
            }
        }
    }
    Outcome oc;
    oc.ok = true;
    oc.detail = std::to_string(checked) + " residue logs across " +
                std::to_string(primes.size()) + " primes";
    return oc;
}

Outcome a06_forgery_optimum() {
    auto mp = mac::make_mac_params(4, 8);
    Rat plain = mac::mac_max_forgery(mp);
    std::vector<std::uint32_t> leak(256);
    for (std::size_t i = 0; i < 256; ++i) leak[i] = std::uint32_t(i & 3);
    Rat leaky = mac::mac_max_forgery_leaky(mp, leak);
    bool ok = plain == Rat(1, 8) && leaky == Rat(1, 2) && plain <= leaky;
    Outcome oc;
    oc.ok = ok;
    oc.detail = "plain " + fmt(to_double(plain)) + " (target 1/8), 2-bit leak " +
                fmt(to_double(leaky)) + " (target 1/2)";
    return oc;
}

Outcome a07_leftover_hash() {
    ff::Gf2Ctx field = ff::make_gf2_ctx(8);
    double worst = 0.0;
    for (u64 rep = 0; rep < 20; ++rep) {
        RandTape tape(mix_seed(0xa07ull, rep));
        std::set<std::string> seen;
        std::vector<BitString> S;
        while (S.size() < 64) {
            BitString x = tape.draw_bits(8);
            if (seen.insert(x.to_hex()).second) S.push_back(std::move(x));
        }
        analysis::LhlResult res = analysis::lhl_check(field, 2, S);
        if (std::fabs(res.bound - 0.125) > 1e-12 || !res.pass) {
            Outcome oc;
            oc.detail = "source " + std::to_string(rep) + " delta " +
                        fmt(to_double(res.delta)) + " vs bound " + fmt(res.bound);
            return oc;
        }
        worst = std::max(worst, to_double(res.delta));
    }
    Outcome oc;
    oc.ok = true;
    oc.detail = "20 sources, worst delta " + fmt(worst) + " vs bound 0.125";
    return oc;
}

Outcome a08_honest_completion() {
    Outcome oc;
    for (const protocol::ProtocolContext* ctx : {&single_ctx(), &phased_ctx()}) {
        harness::TrialBatch b = run_batch(*ctx, "passive", json::object(), 1000, 801);
        const harness::TrialStats& s = b.stats;
        harness::BoundVerdict v = harness::strategy_bound(*ctx, "passive", s);
        if (!v.pass || s.key_equal_accepts != s.trials || s.synchronous_sessions != s.trials ||
            s.robustness_violations != 0 || s.budget_violations != 0) {
            oc.detail = "honest failures: " + std::to_string(s.trials - s.key_equal_accepts) +
                        " of " + std::to_string(s.trials);
            return oc;
        }
    }
    oc.ok = true;
    oc.detail = "1000 trials per figure, every session accepted with equal keys";
    return oc;
}

Outcome a09_substitution_resistance() {
    const protocol::ProtocolContext& ctx = single_ctx();
    Outcome oc;
    std::ostringstream os;
    bool ok = true;
    for (const char* mode : {"random", "worstcase"}) {
        harness::TrialBatch b =
            run_batch(ctx, "substitute_w", json{{"mode", mode}}, 100000, 909);
        harness::BoundVerdict v = harness::strategy_bound(ctx, "substitute_w", b.stats);
        ok = ok && v.pass && v.applicable;
        os << mode << " " << fmt(v.observed) << " vs " << fmt(v.bound) << "+3s ";
    }
    oc.ok = ok;
    oc.detail = os.str() + "(100000 trials each)";
    return oc;
}

Outcome a10_desync_resistance() {
    const protocol::ProtocolContext& ctx = phased_ctx();
    Outcome oc;
    std::ostringstream os;
    bool ok = true;
    struct Row {
        const char* strat;
        json cfg;
    };
    std::vector<Row> rows{{"desync_skip_alice", json{{"from_phase", 2}}},
                          {"replay", json{{"phase", 2}}},
                          {"final_forge", json::object()}};
    for (const Row& r : rows) {
        harness::TrialBatch b = run_batch(ctx, r.strat, r.cfg, 10000, 1010);
        harness::BoundVerdict v = harness::strategy_bound(ctx, r.strat, b.stats);
        ok = ok && v.pass && v.applicable;
        os << r.strat << " " << fmt(v.observed) << " ";
    }
    oc.ok = ok;
    oc.detail = os.str() + "all vs bound " + fmt(3.0 * 4.0 / 256.0) + "+3s (10000 trials each)";
    return oc;
}

Outcome a11_residue_distance() {
    return from_report(sweeps::residue_sweep(64));
}

Outcome a12_xor_correlation() {
    return from_report(sweeps::xor_sweep(4, 100, 77));
}

Outcome a13_reweighting() {
    json rep = sweeps::nm_sweep({17, 97, 257}, 11);
    std::size_t restrictions = 0;
    for (const json& c : rep.at("cells")) {
        for (const json& r : c.at("reweight")) {
            if (!r.at("mean_matches").get<bool>() || !r.at("inflation_ok").get<bool>()) {
                Outcome oc;
                oc.detail = "re-weight mismatch at q=" + std::to_string(c.at("q").get<u64>());
                return oc;
            }
            ++restrictions;
        }
    }
    return from_report(rep, std::to_string(restrictions) + " exact restrictions");
}

struct Criterion {
    const char* id;
    const char* label;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria{
        {"A01", "uniform-seed character sums", a01_uniform_charsums},
        {"A02", "weak-seed character sums", a02_weak_charsums},
        {"A03", "complete-sum cancellation", a03_complete_sums},
        {"A04", "headline extractor distance", a04_headline_distance},
        {"A05", "subgroup discrete logs", a05_subgroup_dlogs},
        {"A06", "forgery optimum", a06_forgery_optimum},
        {"A07", "leftover hash distance", a07_leftover_hash},
        {"A08", "honest completion", a08_honest_completion},
        {"A09", "substitution resistance", a09_substitution_resistance},
        {"A10", "desynchronization resistance", a10_desync_resistance},
        {"A11", "residue map distance", a11_residue_distance},
        {"A12", "xor correlation", a12_xor_correlation},
        {"A13", "seed re-weighting", a13_reweighting},
    };

    std::string filter = argc > 1 ? argv[1] : "";
    bool matched = false;
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!filter.empty() && filter != c.id) continue;
        matched = true;
        Outcome oc;
        try {
            oc = c.run();
        } catch (const std::exception& e) {
            oc.ok = false;
            oc.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %s %s: %s\n", oc.ok ? "PASS" : "FAIL", c.id, c.label,
                    oc.detail.c_str());
        if (!oc.ok) ++failures;
    }
    if (!matched) {
        std::fprintf(stderr, "unknown criterion %s\n", filter.c_str());
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
