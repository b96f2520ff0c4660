#pragma once

// Discrete logarithms in the shapes the extractor needs: the quadratic
// character (a single log bit), the log modulo a 2-power subgroup, and a
// brute-force oracle for cross-checking at small q.

#include <cstdint>
#include <string>
#include <vector>

#include "nmext/ff.hpp"

namespace nmext::dlog {

using ff::u64;

// chi(z) by Euler's criterion: +1 on nonzero squares, -1 on non-squares,
// 0 at z = 0.
inline int quad_char(u64 z, u64 q) {
    if (q < 3 || q % 2 == 0 || !ff::is_prime(q)) throw Error("quad_char: q must be an odd prime");
    z %= q;
    if (z == 0) return 0;
    u64 e = ff::pow_mod(z, (q - 1) / 2, q);
    if (e == 1) return 1;
    if (e == q - 1) return -1;
    throw Error("quad_char: Euler criterion returned a non-root of unity (q composite?)");
}

// log_g(z) mod 2^m by bit-at-a-time peeling in the 2-power subgroup.
// Raising to the cofactor power maps F_q^* onto the subgroup of order M,
// where the log's m low bits are recovered from lowest to highest: after
// subtracting the bits found so far, the remainder has order dividing
// 2^(m-j), and its 2^(m-1-j) power is 1 or -1 according to bit j.
inline u64 dlog_pow2(u64 z, const ff::FieldCtx& ctx) {
    if (ctx.m < 1) throw Error("dlog_pow2: context has no 2-power subgroup (m = 0)");
    z %= ctx.q;
    if (z == 0) throw Error("dlog_pow2: z must be nonzero");
    u64 h = ff::pow_mod(z, ctx.cofactor, ctx.q);
    u64 gp = ff::pow_mod(ctx.g, ctx.cofactor, ctx.q);        // order exactly M
    u64 gp_inv = ff::pow_mod(gp, ctx.M - 1, ctx.q);
    u64 e = 0;
    for (std::uint32_t j = 0; j < ctx.m; ++j) {
        u64 probe = ff::pow_mod(h, u64(1) << (ctx.m - 1 - j), ctx.q);
        if (probe != 1) {
            if (probe != ctx.q - 1)
                throw Error("dlog_pow2: subgroup probe escaped {1,-1}");
            e |= u64(1) << j;
            h = ff::mulmod(h, ff::pow_mod(gp_inv, u64(1) << j, ctx.q), ctx.q);
        }
    }
    return e;
}

constexpr u64 kBruteMaxQ = u64(1) << 20;

// Full log_g(z) by linear scan; q is capped so the scan stays a desk-scale
// oracle rather than an accidental production path.
inline u64 dlog_brute(u64 z, u64 q, u64 g) {
    if (q > kBruteMaxQ) throw Error("dlog_brute: q exceeds the brute-force cap 2^20");
    if (q < 3) throw Error("dlog_brute: q must be an odd prime");
    z %= q;
    if (z == 0) throw Error("dlog_brute: z must be nonzero");
    u64 acc = 1;
    for (u64 e = 0; e < q - 1; ++e) {
        if (acc == z) return e;
        acc = ff::mulmod(acc, g, q);
    }
    throw Error("dlog_brute: z not in <g> (g is not a generator?)");
}

// Table of log_g over all of F_q^*; index z in [1,q), entry = log_g(z).
inline std::vector<u64> dlog_table(u64 q, u64 g) {
    if (q > kBruteMaxQ) throw Error("dlog_table: q exceeds the brute-force cap 2^20");
    std::vector<u64> table(q, 0);
    u64 acc = 1;
    for (u64 e = 0; e < q - 1; ++e) {
        table[acc] = e;
        acc = ff::mulmod(acc, g, q);
    }
    if (acc != 1) throw Error("dlog_table: g does not have order q-1");
    return table;
}

}  // namespace nmext::dlog
