// nmext-lab: command line front end for the extractor library, the protocol
// simulator and the exact verification sweeps.  Every subcommand emits one
// JSON report; the exit code is 0 only if every embedded verdict passed.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "nmext/analysis.hpp"
#include "nmext/harness.hpp"
#include "nmext/protocol.hpp"
#include "nmext/sweeps.hpp"

namespace {

using nmext::BitString;
using nmext::Rat;
using nmext::ff::u64;
using json = nlohmann::json;

std::string rat_str(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

struct Emit {
    std::string out_path;
    bool no_stamp = false;

    void operator()(json rep) const {
        if (!no_stamp) {
            char buf[32];
            std::time_t now = std::time(nullptr);
            std::tm tm{};
            gmtime_r(&now, &tm);
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
            rep["generated_at"] = buf;
        }
        std::string text = rep.dump(2);
        text.push_back('\n');
        if (out_path.empty()) {
            std::fputs(text.c_str(), stdout);
        } else {
            std::ofstream f(out_path, std::ios::trunc);
            if (!f) throw nmext::Error("cannot open " + out_path);
            f << text;
        }
    }
};

bool report_passes(const json& rep) {
    if (rep.contains("summary")) return rep.at("summary").at("all_pass").get<bool>();
    if (rep.contains("verdict")) {
        const json& v = rep.at("verdict");
        if (v.contains("pass")) return v.at("pass").get<bool>();
    }
    if (rep.contains("pass")) return rep.at("pass").get<bool>();
    return true;
}

nmext::protocol::ProtocolContext build_ctx(std::uint32_t fig, std::uint32_t n, double delta,
                                           double eps, std::uint32_t t, bool unchecked,
                                           std::uint32_t v_small) {
    using namespace nmext::protocol;
    if (fig == 1 && t != 0) throw nmext::Error("the one-extraction protocol takes t = 0");
    ProtocolParams p = derive_params(n, delta, eps, t, !unchecked);
    if (v_small > 0) set_tag_length(p, v_small);
    return build_context(p, fig == 1 ? Figure::One : Figure::Two);
}

json params_json(const nmext::protocol::ProtocolContext& ctx) {
    const nmext::protocol::ProtocolParams& p = ctx.p;
    json j;
    j["fig"] = ctx.fig == nmext::protocol::Figure::One ? 1 : 2;
    j["n"] = p.n;
    j["delta"] = p.delta;
    j["epsilon"] = p.epsilon;
    j["t_cond"] = p.t_cond;
    j["C"] = p.C;
    j["s"] = p.s;
    j["n_row"] = p.n_row;
    j["m_nm"] = p.m_nm;
    j["v_small"] = p.v_small;
    j["v_big"] = p.v_big;
    j["ell"] = p.ell;
    j["k"] = p.k;
    j["k_prime"] = p.k_prime;
    j["d_seed"] = p.d_seed;
    j["m_out"] = p.m_out;
    j["checked"] = p.checked;
    j["q"] = ctx.nm_field.q;
    j["seed_width"] = ctx.seed_width;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"character-sum extractor laboratory"};
    app.require_subcommand(1);
    Emit emit;
    app.add_option("--out", emit.out_path, "write the report here instead of stdout");
    app.add_flag("--no-stamp", emit.no_stamp, "omit the generated_at field");
    int exit_code = 0;
    auto note = [&](const json& rep) {
        if (!report_passes(rep)) exit_code = 1;
    };

    // findprime
    u64 fp_m = 0, fp_max = u64(1) << 20;
    auto* fp = app.add_subcommand("findprime", "smallest prime q = 1 mod 2^m");
    fp->add_option("--m", fp_m, "subgroup power")->required();
    fp->add_option("--max-index", fp_max, "scan ceiling");
    fp->callback([&] {
        if (fp_m < 1 || fp_m > 62) throw nmext::Error("findprime: m out of range");
        auto r = nmext::ff::find_prime_1_mod_M(u64(1) << fp_m, fp_max);
        json rep;
        rep["tool"] = "findprime";
        rep["config"] = {{"m", fp_m}};
        rep["q"] = r.q;
        rep["index"] = r.index;
        emit(rep);
    });

    // nmext
    u64 nx_q = 0, nx_x = 0, nx_y = 0;
    std::uint32_t nx_m = 1;
    auto* nx = app.add_subcommand("nmext", "evaluate the extractor at one point");
    nx->add_option("--q", nx_q)->required();
    nx->add_option("--m", nx_m, "output bits");
    nx->add_option("--x", nx_x)->required();
    nx->add_option("--y", nx_y)->required();
    nx->callback([&] {
        auto ctx = nmext::ff::make_field_ctx(nx_q, nx_m);
        BitString r = nmext::extract::nmext(nx_x, nx_y, ctx);
        json rep;
        rep["tool"] = "nmext";
        rep["config"] = {{"q", nx_q}, {"m", nx_m}, {"x", nx_x}, {"y", nx_y}};
        rep["value"] = r.to_u64();
        rep["bits"] = r.to_hex();
        emit(rep);
    });

    // dlog
    u64 dl_q = 0, dl_z = 0;
    std::uint32_t dl_m = 0;
    auto* dl = app.add_subcommand("dlog", "discrete log, brute or subgroup");
    dl->add_option("--q", dl_q)->required();
    dl->add_option("--z", dl_z)->required();
    dl->add_option("--m", dl_m, "use the 2^m subgroup instead of the full log");
    dl->callback([&] {
        json rep;
        rep["tool"] = "dlog";
        rep["config"] = {{"q", dl_q}, {"z", dl_z}, {"m", dl_m}};
        if (dl_m > 0) {
            auto ctx = nmext::ff::make_field_ctx(dl_q, dl_m);
            rep["g"] = ctx.g;
            rep["value"] = nmext::dlog::dlog_pow2(dl_z, ctx);
        } else {
            u64 g = nmext::ff::find_generator(dl_q, nmext::ff::factorize(dl_q - 1));
            rep["g"] = g;
            rep["value"] = nmext::dlog::dlog_brute(dl_z, dl_q, g);
        }
        emit(rep);
    });

    // mac
    std::uint32_t mc_v = 0, mc_d = 0;
    std::string mc_key, mc_msg;
    auto* mc = app.add_subcommand("mac", "one-time tag of a message");
    mc->add_option("--v", mc_v, "tag bits")->required();
    mc->add_option("--d", mc_d, "max message bits")->required();
    mc->add_option("--key", mc_key, "2v-bit key, len:hex")->required();
    mc->add_option("--msg", mc_msg, "message, len:hex")->required();
    mc->callback([&] {
        auto p = nmext::mac::make_mac_params(mc_v, mc_d);
        BitString tag =
            nmext::mac::mac_tag(BitString::from_hex(mc_key), BitString::from_hex(mc_msg), p);
        json rep;
        rep["tool"] = "mac";
        rep["config"] = {{"v", mc_v}, {"d", mc_d}, {"key", mc_key}, {"msg", mc_msg}};
        rep["tag"] = tag.to_hex();
        emit(rep);
    });

    // params
    std::uint32_t pp_fig = 2, pp_n = 0, pp_t = 0, pp_vs = 0;
    double pp_delta = 0.0, pp_eps = 0.0;
    bool pp_unchecked = false;
    auto* pp = app.add_subcommand("params", "derive the protocol parameter ledger");
    pp->add_option("--fig", pp_fig)->check(CLI::IsMember({1, 2}));
    pp->add_option("--n", pp_n)->required();
    pp->add_option("--delta", pp_delta)->required();
    pp->add_option("--eps", pp_eps)->required();
    pp->add_option("--t", pp_t);
    pp->add_option("--v-small", pp_vs, "override the short tag length");
    pp->add_flag("--unchecked", pp_unchecked, "clamp instead of rejecting infeasible rows");
    pp->callback([&] {
        auto ctx = build_ctx(pp_fig, pp_n, pp_delta, pp_eps, pp_t, pp_unchecked, pp_vs);
        json rep;
        rep["tool"] = "params";
        rep["params"] = params_json(ctx);
        emit(rep);
    });

    // protocol run
    auto* pr = app.add_subcommand("protocol", "run sessions against a strategy");
    auto* run = pr->add_subcommand("run");
    std::uint32_t pr_fig = 2, pr_n = 96, pr_t = 1, pr_vs = 0, pr_probe = 0;
    double pr_delta = 0.25, pr_eps = 0.25;
    bool pr_unchecked = false, pr_transcript = false, pr_post = false;
    std::string pr_strategy = "passive", pr_cfg = "{}", pr_source = "interval";
    std::uint32_t pr_k = 0;
    u64 pr_offset = 0, pr_trials = 1000, pr_seed = 1;
    run->add_option("--fig", pr_fig)->check(CLI::IsMember({1, 2}));
    run->add_option("--n", pr_n);
    run->add_option("--delta", pr_delta);
    run->add_option("--eps", pr_eps);
    run->add_option("--t", pr_t);
    run->add_option("--v-small", pr_vs);
    run->add_flag("--unchecked", pr_unchecked);
    run->add_option("--strategy", pr_strategy);
    run->add_option("--strategy-config", pr_cfg, "inline JSON for the strategy");
    run->add_option("--source", pr_source)->check(CLI::IsMember({"interval", "subset"}));
    run->add_option("--source-k", pr_k, "flat source width, default floor(delta n)");
    run->add_option("--source-offset", pr_offset);
    run->add_option("--trials", pr_trials);
    run->add_option("--seed", pr_seed);
    run->add_option("--probe-bits", pr_probe, "collect leading key bits and compare to uniform");
    run->add_flag("--post-application", pr_post, "grant keys to the adversary after accept");
    run->add_flag("--transcript", pr_transcript, "run a single session and dump the transcript");
    run->callback([&] {
        using namespace nmext::harness;
        auto ctx = build_ctx(pr_fig, pr_n, pr_delta, pr_eps, pr_t, pr_unchecked, pr_vs);
        SourceSpec src;
        src.kind = pr_source == "subset" ? SourceSpec::Kind::Subset : SourceSpec::Kind::Interval;
        src.k = pr_k ? pr_k : std::uint32_t(ctx.p.k);
        src.offset = pr_offset;
        src.seed = pr_seed;
        json rep;
        rep["tool"] = "protocol-run";
        rep["params"] = params_json(ctx);
        rep["config"] = {{"strategy", pr_strategy},
                         {"strategy_config", json::parse(pr_cfg)},
                         {"source", pr_source},
                         {"source_k", src.k},
                         {"trials", pr_trials},
                         {"seed", pr_seed},
                         {"post_application", pr_post}};
        if (pr_transcript) {
            std::vector<nmext::BitString> pool;
            if (src.kind == SourceSpec::Kind::Subset) pool = materialize_subset(src, ctx.p.n);
            nmext::RandTape src_tape(nmext::mix_seed(pr_seed, 0, 1));
            BitString x = sample_source(src, ctx.p.n, src_tape, &pool);
            auto strat = make_strategy(pr_strategy, json::parse(pr_cfg), ctx);
            SessionOutcome oc =
                run_session(ctx, x, *strat, nmext::mix_seed(pr_seed, 0, 2),
                            nmext::mix_seed(pr_seed, 0, 3), nmext::mix_seed(pr_seed, 0, 4),
                            pr_post);
            rep["session"] = {{"alice", oc.a_term == nmext::protocol::Terminal::Accept
                                            ? "accept"
                                            : oc.a_term == nmext::protocol::Terminal::Reject
                                                  ? "reject"
                                                  : "open"},
                              {"bob", oc.b_term == nmext::protocol::Terminal::Accept
                                          ? "accept"
                                          : oc.b_term == nmext::protocol::Terminal::Reject
                                                ? "reject"
                                                : "open"},
                              {"synchronous", oc.synchronous},
                              {"keys_equal", oc.r_a && oc.r_b && *oc.r_a == *oc.r_b}};
            if (oc.r_a) rep["session"]["key_a"] = oc.r_a->to_hex();
            if (oc.r_b) rep["session"]["key_b"] = oc.r_b->to_hex();
            rep["transcript"] = transcript_to_json(oc.transcript);
            emit(rep);
            return;
        }
        TrialConfig cfg;
        cfg.strategy = pr_strategy;
        cfg.strategy_cfg = json::parse(pr_cfg);
        cfg.source = src;
        cfg.trials = pr_trials;
        cfg.seed = pr_seed;
        cfg.post_application = pr_post;
        cfg.key_probe_bits = pr_probe;
        TrialBatch batch = run_trials(ctx, cfg);
        BoundVerdict v = strategy_bound(ctx, pr_strategy, batch.stats);
        rep["stats"] = stats_to_json(batch.stats);
        rep["verdict"] = verdict_to_json(v);
        if (pr_probe > 0) {
            ExtractionEstimate est = estimate_extraction(ctx, src, pr_trials, pr_seed, pr_probe);
            rep["extraction"] = {{"samples", est.samples},   {"bits", est.bits},
                                 {"delta_emp", est.delta_emp}, {"delta_baseline", est.delta_baseline},
                                 {"scale", est.scale},         {"reliable", est.reliable}};
        }
        note(rep);
        emit(rep);
    });

    // verify family
    auto* vf = app.add_subcommand("verify", "exact checks against the proven bounds");
    vf->require_subcommand(1);

    u64 vc_qmax = 101, vc_seed = 7;
    bool vc_weak = false;
    auto* vc = vf->add_subcommand("charsum", "character sums against their ceilings");
    vc->add_option("--qmax", vc_qmax);
    vc->add_option("--seed", vc_seed);
    vc->add_flag("--weak", vc_weak, "weak-seed moment bounds instead of the uniform sweep");
    vc->callback([&] {
        json rep = vc_weak ? nmext::sweeps::charsum_weak_sweep(vc_qmax, {1, 2, 3}, vc_seed)
                           : nmext::sweeps::charsum_sweep(vc_qmax, vc_seed);
        note(rep);
        emit(rep);
    });

    std::vector<u64> vw_q{5, 7, 11, 13};
    auto* vw = vf->add_subcommand("weil", "complete-sum bound over small primes");
    vw->add_option("--q", vw_q);
    vw->callback([&] {
        json rep = nmext::sweeps::weil_sweep(vw_q);
        note(rep);
        emit(rep);
    });

    std::vector<u64> vn_q{17, 97};
    u64 vn_seed = 11;
    bool vn_flagship = false;
    auto* vn = vf->add_subcommand("nm", "exact extractor distance against the flat-source bound");
    vn->add_option("--q", vn_q);
    vn->add_option("--seed", vn_seed);
    vn->add_flag("--flagship", vn_flagship, "the 2^12-scale headline instance");
    vn->callback([&] {
        json rep = vn_flagship ? nmext::sweeps::nm_flagship() : nmext::sweeps::nm_sweep(vn_q, vn_seed);
        note(rep);
        emit(rep);
    });

    std::size_t vx_m = 4, vx_count = 100;
    u64 vx_seed = 3;
    auto* vx = vf->add_subcommand("xor", "numeric XOR lemma on random joints");
    vx->add_option("--m", vx_m);
    vx->add_option("--count", vx_count);
    vx->add_option("--seed", vx_seed);
    vx->callback([&] {
        json rep = nmext::sweeps::xor_sweep(vx_m, vx_count, vx_seed);
        note(rep);
        emit(rep);
    });

    u64 vr_nmax = 64;
    auto* vr = vf->add_subcommand("residue-map", "uniform residue reduction distances");
    vr->add_option("--nmax", vr_nmax);
    vr->callback([&] {
        json rep = nmext::sweeps::residue_sweep(vr_nmax);
        note(rep);
        emit(rep);
    });

    u64 vl_nmax = 64;
    double vl_cmax = 8.0;
    auto* vl = vf->add_subcommand("l1norm", "l1 Fourier mass of residue characters");
    vl->add_option("--nmax", vl_nmax);
    vl->add_option("--c-max", vl_cmax);
    vl->callback([&] {
        json rep = nmext::sweeps::l1norm_sweep(vl_nmax, vl_cmax);
        note(rep);
        emit(rep);
    });

    std::uint32_t vm_v = 4, vm_d = 8, vm_leak = 2;
    auto* vm = vf->add_subcommand("mac", "exhaustive one-time forgery optimum");
    vm->add_option("--v", vm_v);
    vm->add_option("--d", vm_d);
    vm->add_option("--leak-bits", vm_leak, "key bits granted to the forger");
    vm->callback([&] {
        auto p = nmext::mac::make_mac_params(vm_v, vm_d);
        Rat best = nmext::mac::mac_max_forgery(p);
        Rat bound = Rat(nmext::Int(p.chunks)) * nmext::rat_pow2(-int(p.v));
        std::vector<std::uint32_t> leak(std::size_t(1) << (2 * p.v));
        for (std::size_t k = 0; k < leak.size(); ++k)
            leak[k] = std::uint32_t(k & ((1u << vm_leak) - 1));
        Rat best_leaky = nmext::mac::mac_max_forgery_leaky(p, leak);
        Rat bound_leaky = Rat(nmext::Int(p.chunks)) * nmext::rat_pow2(int(vm_leak) - int(p.v));
        bool pass = best <= bound && best_leaky <= bound_leaky;
        json rep;
        rep["tool"] = "mac-verify";
        rep["config"] = {{"v", vm_v}, {"d", vm_d}, {"leak_bits", vm_leak}};
        rep["optimum"] = {{"exact", rat_str(best)}, {"value", nmext::to_double(best)}};
        rep["bound"] = {{"exact", rat_str(bound)}, {"value", nmext::to_double(bound)}};
        rep["optimum_leaky"] = {{"exact", rat_str(best_leaky)},
                                {"value", nmext::to_double(best_leaky)}};
        rep["bound_leaky"] = {{"exact", rat_str(bound_leaky)},
                              {"value", nmext::to_double(bound_leaky)}};
        rep["pass"] = pass;
        note(rep);
        emit(rep);
    });

    std::uint32_t vh_n = 8, vh_m = 2, vh_k = 6, vh_count = 20;
    u64 vh_seed = 5;
    auto* vh = vf->add_subcommand("lhl", "leftover hash distances on flat sources");
    vh->add_option("--n", vh_n);
    vh->add_option("--m", vh_m);
    vh->add_option("--k", vh_k);
    vh->add_option("--count", vh_count);
    vh->add_option("--seed", vh_seed);
    vh->callback([&] {
        if (vh_k >= vh_n) throw nmext::Error("lhl: k must be below n");
        auto field = nmext::ff::make_gf2_ctx(vh_n);
        json cells = json::array();
        for (std::uint32_t c = 0; c < vh_count; ++c) {
            nmext::RandTape tape(nmext::mix_seed(vh_seed, c));
            std::set<u64> chosen;
            while (chosen.size() < (std::size_t(1) << vh_k))
                chosen.insert(tape.draw_below(u64(1) << vh_n));
            std::vector<BitString> S;
            for (u64 v : chosen) S.push_back(BitString::from_u64(v, vh_n));
            auto res = nmext::analysis::lhl_check(field, vh_m, S);
            json row;
            row["index"] = c;
            row["delta"] = nmext::to_double(res.delta);
            row["delta_exact"] = rat_str(res.delta);
            row["bound"] = res.bound;
            row["pass"] = res.pass;
            cells.push_back(std::move(row));
        }
        json rep = nmext::sweeps::summarize(std::move(cells));
        rep["tool"] = "lhl-verify";
        rep["config"] = {{"n", vh_n}, {"m", vh_m}, {"k", vh_k}, {"count", vh_count}, {"seed", vh_seed}};
        note(rep);
        emit(rep);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return exit_code;
}
