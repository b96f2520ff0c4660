#pragma once

// Sweep drivers: enumerate instance families, run the exact checks, and
// fold the cells into a JSON report with an all_pass summary.  Cell order is
// fixed by the enumeration, so reports are byte-stable across worker counts.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmext/analysis.hpp"
#include "nmext/seeding.hpp"

namespace nmext::sweeps {

using analysis::json;
using ff::u64;

struct AdvMap {
    std::string label;
    std::vector<u64> table;  // A(y) for y in [0, q)
};

inline std::vector<u64> fixed_point_free_domain(const AdvMap& m) {
    std::vector<u64> t;
    for (u64 y = 0; y < m.table.size(); ++y)
        if (m.table[y] != y) t.push_back(y);
    return t;
}

// Affine maps plus seeded derangements.
inline std::vector<AdvMap> adversary_maps(u64 q, unsigned derangements, u64 seed) {
    std::vector<AdvMap> maps;
    auto affine = [&](u64 c1, u64 c0, const std::string& label) {
        AdvMap m;
        m.label = label;
        m.table.resize(q);
        for (u64 y = 0; y < q; ++y) m.table[y] = ff::addmod(ff::mulmod(c1, y, q), c0, q);
        maps.push_back(std::move(m));
    };
    affine(1, 1, "y+1");
    if (q > 3) affine(2, 1, "2y+1");
    affine(1, 2, "y+2");
    for (unsigned d = 0; d < derangements; ++d) {
        RandTape tape(mix_seed(seed, q, d + 1));
        std::vector<u64> perm(q);
        std::iota(perm.begin(), perm.end(), 0);
        for (int attempt = 0; attempt < 200; ++attempt) {
            for (std::size_t i = q - 1; i > 0; --i)
                std::swap(perm[i], perm[std::size_t(tape.draw_below(i + 1))]);
            bool fixed = false;
            for (u64 y = 0; y < q; ++y)
                if (perm[y] == y) fixed = true;
            if (!fixed) break;
        }
        // a stray fixed point after the retries just shrinks the domain
        AdvMap m;
        m.label = "perm" + std::to_string(d + 1);
        m.table = perm;
        maps.push_back(std::move(m));
    }
    return maps;
}

inline std::vector<u64> full_field(u64 q) {
    std::vector<u64> v(q);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

inline std::vector<u64> seeded_subset(u64 q, std::size_t size, u64 seed) {
    if (size > q) throw Error("seeded_subset: size exceeds the field");
    std::vector<u64> all = full_field(q);
    RandTape tape(seed);
    for (std::size_t i = all.size() - 1; i > 0; --i)
        std::swap(all[i], all[std::size_t(tape.draw_below(i + 1))]);
    all.resize(size);
    std::sort(all.begin(), all.end());
    return all;
}

inline std::vector<u64> odd_primes_upto(u64 qmax) {
    std::vector<u64> ps;
    for (u64 q = 3; q <= qmax; ++q)
        if (ff::is_prime(q)) ps.push_back(q);
    return ps;
}

inline json summarize(json cells) {
    std::size_t violations = 0;
    for (const json& c : cells)
        if (!c.at("pass").get<bool>()) ++violations;
    json rep;
    rep["cells"] = std::move(cells);
    rep["summary"] = {{"cells", rep["cells"].size()},
                      {"violations", violations},
                      {"all_pass", violations == 0}};
    return rep;
}

// ---------------------------------------------------------------------------
// character sum sweeps

// Full-seed sweep: Theta against the uniform and eta ceilings for every
// (prime, map, exponent pair, source) cell, with an Euler-criterion
// cross-check on the quadratic diagonal.
inline json charsum_sweep(u64 qmax, u64 seed) {
    json cells = json::array();
    for (u64 q : odd_primes_upto(qmax)) {
        analysis::CharField cf = analysis::make_char_field(q);
        std::vector<AdvMap> maps = adversary_maps(q, 5, mix_seed(seed, 1));
        std::vector<u64> a_list{1};
        if ((q - 1) / 2 != 1) a_list.push_back((q - 1) / 2);
        std::vector<u64> b_list{0, 1};
        if ((q - 1) / 2 != 1) b_list.push_back((q - 1) / 2);
        std::size_t sub = std::size_t(std::ceil(std::pow(double(q), 0.75)));
        std::vector<std::pair<std::string, std::vector<u64>>> sources{
            {"full", full_field(q)}, {"subset", seeded_subset(q, sub, mix_seed(seed, q, 2))}};

        struct Cell {
            const AdvMap* map;
            u64 a, b;
            const std::pair<std::string, std::vector<u64>>* src;
        };
        std::vector<Cell> grid;
        for (const AdvMap& m : maps)
            for (u64 a : a_list)
                for (u64 b : b_list)
                    for (const auto& src : sources) grid.push_back({&m, a, b, &src});

        std::vector<json> rows(grid.size());
        analysis::parallel_for(grid.size(), [&](std::size_t i) {
            const Cell& c = grid[i];
            std::vector<u64> T = fixed_point_free_domain(*c.map);
            auto A = [&](u64 y) { return c.map->table[y]; };
            double theta =
                analysis::charsum_theta(cf, {q, c.a, c.b}, c.src->second, T, A);
            double ub = analysis::uniform_theta_bound(q, c.src->second.size());
            double eb = analysis::eta_theta_bound(q, c.src->second.size());
            bool pass = theta <= ub + analysis::kFloatTol && theta <= eb + analysis::kFloatTol;
            json row;
            row["q"] = q;
            row["map"] = c.map->label;
            row["a"] = c.a;
            row["b"] = c.b;
            row["source"] = c.src->first;
            row["s_size"] = c.src->second.size();
            row["t_size"] = T.size();
            row["theta"] = theta;
            row["uniform_bound"] = ub;
            row["eta_bound"] = eb;
            if (c.a == (q - 1) / 2 && c.b == (q - 1) / 2) {
                double quad = analysis::charsum_theta_quad(q, c.src->second, T, A);
                row["euler_xcheck"] = std::abs(theta - quad);
                if (std::abs(theta - quad) > 1e-6 * (1.0 + theta)) pass = false;
            }
            row["pass"] = pass;
            rows[i] = std::move(row);
        });
        for (json& r : rows) cells.push_back(std::move(r));
    }
    json rep = summarize(std::move(cells));
    rep["tool"] = "charsum-sweep";
    rep["config"] = {{"qmax", qmax}, {"seed", seed}, {"mode", "uniform"}};
    return rep;
}

// Weak-seed sweep: small seed sets against the moment bound for each r.
inline json charsum_weak_sweep(u64 qmax, const std::vector<unsigned>& r_list, u64 seed) {
    json cells = json::array();
    for (u64 q : odd_primes_upto(qmax)) {
        analysis::CharField cf = analysis::make_char_field(q);
        std::vector<AdvMap> maps = adversary_maps(q, 2, mix_seed(seed, 3));
        std::vector<std::size_t> t_sizes{std::size_t(std::ceil(std::sqrt(double(q)))),
                                         std::size_t((q + 1) / 2)};
        std::vector<u64> S = full_field(q);

        struct Cell {
            const AdvMap* map;
            std::size_t t_size;
        };
        std::vector<Cell> grid;
        for (const AdvMap& m : maps)
            for (std::size_t ts : t_sizes) grid.push_back({&m, ts});

        std::vector<json> rows(grid.size());
        analysis::parallel_for(grid.size(), [&](std::size_t i) {
            const Cell& c = grid[i];
            std::vector<u64> domain = fixed_point_free_domain(*c.map);
            std::size_t ts = std::min(c.t_size, domain.size());
            RandTape tape(mix_seed(seed, q, u64(i) + 17));
            for (std::size_t j = domain.size() - 1; j > 0; --j)
                std::swap(domain[j], domain[std::size_t(tape.draw_below(j + 1))]);
            domain.resize(ts);
            std::sort(domain.begin(), domain.end());
            auto A = [&](u64 y) { return c.map->table[y]; };
            double theta = analysis::charsum_theta(cf, {q, 1, 1}, S, domain, A);
            json bounds = json::array();
            bool pass = true;
            std::vector<unsigned> rs = r_list;
            rs.push_back(analysis::default_moment_order(q, ts));
            std::sort(rs.begin(), rs.end());
            rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
            for (unsigned r : rs) {
                double wb = analysis::weak_theta_bound(r, q, S.size(), ts);
                bool ok = theta <= wb + analysis::kFloatTol;
                bounds.push_back({{"r", r}, {"bound", wb}, {"pass", ok}});
                if (!ok) pass = false;
            }
            json row;
            row["q"] = q;
            row["map"] = c.map->label;
            row["s_size"] = S.size();
            row["t_size"] = ts;
            row["theta"] = theta;
            row["moment_bounds"] = std::move(bounds);
            row["pass"] = pass;
            rows[i] = std::move(row);
        });
        for (json& r : rows) cells.push_back(std::move(r));
    }
    json rep = summarize(std::move(cells));
    rep["tool"] = "charsum-weak-sweep";
    rep["config"] = {{"qmax", qmax}, {"seed", seed}, {"mode", "weak"}};
    return rep;
}

// ---------------------------------------------------------------------------
// complete-sum spot checks

inline json weil_sweep(const std::vector<u64>& qs) {
    json cells = json::array();
    for (u64 q : qs) {
        analysis::CharField cf = analysis::make_char_field(q);
        std::vector<std::vector<u64>> root_sets;
        for (u64 r1 = 0; r1 < q; ++r1)
            for (u64 r2 = r1 + 1; r2 < q; ++r2) root_sets.push_back({r1, r2});
        for (u64 r1 = 0; r1 < q; ++r1)
            for (u64 r2 = r1 + 1; r2 < q; ++r2)
                for (u64 r3 = r2 + 1; r3 < q; ++r3) root_sets.push_back({r1, r2, r3});
        std::vector<json> rows(root_sets.size());
        analysis::parallel_for(root_sets.size(), [&](std::size_t i) {
            const std::vector<u64>& roots = root_sets[i];
            std::vector<u64> mults(roots.size(), 1);
            analysis::WeilResult res = analysis::weil_check(cf, roots, mults);
            json row;
            row["q"] = q;
            row["roots"] = roots;
            row["sum_abs"] = res.sum_abs;
            row["bound"] = res.bound;
            row["pass"] = res.pass;
            rows[i] = std::move(row);
        });
        for (json& r : rows) cells.push_back(std::move(r));
    }
    json rep = summarize(std::move(cells));
    rep["tool"] = "weil-sweep";
    rep["config"] = {{"q", qs}};
    return rep;
}

// ---------------------------------------------------------------------------
// exact extractor distance sweeps

inline const char* variant_name(analysis::NmVariant v) {
    switch (v) {
        case analysis::NmVariant::Bit: return "bit";
        case analysis::NmVariant::Dlog: return "dlog";
        case analysis::NmVariant::GeneralM: return "general";
    }
    return "?";
}

// Distance of the extractor output against the flat-source ceiling, plus
// seed-subset re-weighting: the restricted distance must equal the mean of
// the per-seed distances and obey the (q / |T'|) inflation of the full one.
inline json nm_sweep(const std::vector<u64>& qs, u64 seed) {
    json cells = json::array();
    for (u64 q : qs) {
        std::vector<std::pair<analysis::NmVariant, u64>> variants{{analysis::NmVariant::Bit, 2}};
        u64 two_part = 1;
        {
            u64 r = q - 1;
            while (r % 2 == 0 && two_part < 8) {
                two_part *= 2;
                r /= 2;
            }
        }
        if (two_part >= 4) variants.push_back({analysis::NmVariant::Dlog, two_part});
        if ((q - 1) % 3 == 0) variants.push_back({analysis::NmVariant::GeneralM, 3});

        std::vector<AdvMap> maps = adversary_maps(q, 1, mix_seed(seed, 5));
        std::size_t k = 0;
        while ((u64(1) << (k + 1)) < q) ++k;
        std::size_t s_size = std::size_t(1) << (k >= 1 ? k - 1 : 0);
        std::vector<std::pair<std::string, std::vector<u64>>> sources;
        {
            std::vector<u64> interval(s_size);
            std::iota(interval.begin(), interval.end(), 0);
            sources.push_back({"interval", std::move(interval)});
            sources.push_back({"subset", seeded_subset(q, s_size, mix_seed(seed, q, 9))});
        }

        for (const auto& [variant, M] : variants) {
            for (const AdvMap& m : maps) {
                std::vector<u64> T = fixed_point_free_domain(m);
                auto A = [&](u64 y) { return m.table[y]; };
                for (const auto& [src_label, S] : sources) {
                    analysis::NmDistance nd = analysis::nm_distance(q, M, S, T, A, variant);
                    double bound = analysis::nm_distance_bound(q, M, S.size());
                    double delta = to_double(nd.delta);
                    bool pass = delta <= bound + analysis::kFloatTol;

                    // re-weighting: flat sub-seed restrictions
                    json rew = json::array();
                    RandTape tape(mix_seed(seed, q, 21));
                    for (int trial = 0; trial < 10; ++trial) {
                        std::vector<u64> tp = T;
                        for (std::size_t j = tp.size() - 1; j > 0; --j)
                            std::swap(tp[j], tp[std::size_t(tape.draw_below(j + 1))]);
                        tp.resize(std::max<std::size_t>(1, T.size() / 4));
                        std::sort(tp.begin(), tp.end());
                        analysis::NmDistance sub = analysis::nm_distance(q, M, S, tp, A, variant);
                        Rat mean = 0;
                        for (std::size_t j = 0; j < T.size(); ++j) {
                            if (std::binary_search(tp.begin(), tp.end(), T[j]))
                                mean += nd.per_seed[j];
                        }
                        mean /= Rat(Int(tp.size()));
                        bool eq = mean == sub.delta;
                        Rat inflated = nd.delta * Rat(Int(q), Int(tp.size()));
                        bool dominated = sub.delta <= inflated;
                        rew.push_back({{"t_size", tp.size()},
                                       {"restricted", to_double(sub.delta)},
                                       {"mean_matches", eq},
                                       {"inflation_ok", dominated}});
                        if (!eq || !dominated) pass = false;
                    }

                    json row;
                    row["q"] = q;
                    row["variant"] = variant_name(variant);
                    row["M"] = M;
                    row["map"] = m.label;
                    row["source"] = src_label;
                    row["s_size"] = S.size();
                    row["delta"] = delta;
                    row["bound"] = bound;
                    row["reweight"] = std::move(rew);
                    row["pass"] = pass;
                    cells.push_back(std::move(row));
                }
            }
        }
    }
    json rep = summarize(std::move(cells));
    rep["tool"] = "nm-sweep";
    rep["config"] = {{"q", qs}, {"seed", seed}};
    return rep;
}

// The headline instance: one-bit extractor over the smallest prime past 2^12
// with a 2^11 flat source and the full seed set.
inline json nm_flagship() {
    u64 q = ff::next_prime(4096);
    if (q != 4099) throw Error("nm_flagship: unexpected prime");
    std::vector<u64> S(2048);
    std::iota(S.begin(), S.end(), 0);
    std::vector<u64> T(q);
    std::iota(T.begin(), T.end(), 0);
    auto A = [q](u64 y) { return ff::addmod(y, 1, q); };
    analysis::NmDistance nd = analysis::nm_distance(q, 2, S, T, A, analysis::NmVariant::Bit);
    double bound = analysis::nm_distance_bound(q, 2, S.size());
    double delta = to_double(nd.delta);
    Rat worst = 0;
    for (const Rat& r : nd.per_seed)
        if (r > worst) worst = r;
    json cell;
    cell["q"] = q;
    cell["variant"] = "bit";
    cell["map"] = "y+1";
    cell["s_size"] = S.size();
    cell["t_size"] = T.size();
    cell["delta"] = delta;
    cell["worst_seed"] = to_double(worst);
    cell["bound"] = bound;
    cell["pass"] = delta <= bound + analysis::kFloatTol;
    json rep;
    rep["tool"] = "nm-flagship";
    rep["config"] = {{"q", q}, {"s_size", S.size()}};
    rep["cells"] = json::array({cell});
    rep["summary"] = {{"cells", 1},
                      {"violations", cell["pass"].get<bool>() ? 0 : 1},
                      {"all_pass", cell["pass"].get<bool>()}};
    return rep;
}

// ---------------------------------------------------------------------------
// XOR lemma, residue map, l1 norms

inline json xor_sweep(std::size_t M, std::size_t count, u64 seed) {
    std::vector<json> rows(count);
    analysis::parallel_for(count, [&](std::size_t i) {
        RandTape tape(mix_seed(seed, u64(i)));
        Int total = 0;
        std::vector<u64> w(M * M);
        for (auto& x : w) {
            x = 1 + tape.draw_below(1000);
            total += x;
        }
        analysis::JointTable jt;
        jt.rows = jt.cols = M;
        for (std::size_t c = 0; c < M * M; ++c) jt.p.push_back(Rat(Int(w[c]), total));
        jt.row_axis = "W";
        jt.col_axis = "Wp";
        analysis::XorCheck chk = analysis::xor_lemma_check(jt);
        json row;
        row["index"] = i;
        row["alpha"] = chk.alpha;
        row["delta"] = to_double(chk.delta);
        row["linf"] = to_double(chk.linf);
        row["pass"] = chk.pass_delta && chk.pass_linf;
        rows[i] = std::move(row);
    });
    json cells = json::array();
    for (json& r : rows) cells.push_back(std::move(r));
    json rep = summarize(std::move(cells));
    rep["tool"] = "xor-sweep";
    rep["config"] = {{"M", M}, {"count", count}, {"seed", seed}};
    return rep;
}

inline json residue_sweep(u64 nmax) {
    json cells = json::array();
    for (u64 N = 3; N <= nmax; ++N) {
        for (u64 M = 2; M < N; ++M) {
            Rat d = analysis::residue_map_distance(N, M);
            Rat ceiling = Rat(Int(2 * M), Int(N));
            bool pass = d <= ceiling;
            json row;
            row["N"] = N;
            row["M"] = M;
            row["distance"] = to_double(d);
            row["ceiling"] = to_double(ceiling);
            row["pass"] = pass;
            cells.push_back(std::move(row));
        }
    }
    json rep = summarize(std::move(cells));
    rep["tool"] = "residue-sweep";
    rep["config"] = {{"nmax", nmax}};
    return rep;
}

inline json l1norm_sweep(u64 nmax, double c_max) {
    struct Cell {
        u64 N, M;
    };
    std::vector<Cell> grid;
    for (u64 N = 2; N <= nmax; ++N)
        for (u64 M = 1; M <= N; ++M) grid.push_back({N, M});
    std::vector<json> rows(grid.size());
    analysis::parallel_for(grid.size(), [&](std::size_t i) {
        analysis::L1NormResult res = analysis::l1_fourier_norm_check(grid[i].N, grid[i].M, c_max);
        double worst = 0.0;
        for (double v : res.norms) worst = std::max(worst, v);
        json row;
        row["N"] = grid[i].N;
        row["M"] = grid[i].M;
        row["max_norm"] = worst;
        row["bound"] = res.bound;
        row["pass"] = res.pass;
        rows[i] = std::move(row);
    });
    json cells = json::array();
    for (json& r : rows) cells.push_back(std::move(r));
    json rep = summarize(std::move(cells));
    rep["tool"] = "l1norm-sweep";
    rep["config"] = {{"nmax", nmax}, {"c_max", c_max}};
    return rep;
}

}  // namespace nmext::sweeps
