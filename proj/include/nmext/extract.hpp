#pragma once

// The extractors.  nmext maps a pair (x, y) of field elements to the low m
// bits of log_g(x + y); nmext_bit is the one-bit quadratic-character variant;
// nmext_general_m reduces the full log modulo an M that need not divide q-1.
// strong_ext is the seeded extractor: multiply in GF(2^n) and keep a bit
// range of the product.
//
// Convention at the single non-invertible point: x + y = 0 has no logarithm,
// and the extractor output there is the designated all-zero string (0 for the
// residue forms).  The distance bounds checked elsewhere carry a 1/q term for
// exactly this point.

#include <cstdint>
#include <vector>

#include "nmext/bitstring.hpp"
#include "nmext/dlog.hpp"
#include "nmext/ff.hpp"

namespace nmext::extract {

using ff::u64;

// chi(x+y) mapped to one bit: +1 -> 0, -1 -> 1, and 0 -> 0 at the designated
// point.
inline BitString nmext_bit(u64 x, u64 y, u64 q) {
    int c = dlog::quad_char(ff::addmod(x, y, q), q);
    return BitString::from_u64(c == -1 ? 1 : 0, 1);
}

// Low m bits of log_g(x+y), as an m-bit string (position 1 = LSB).
inline BitString nmext(u64 x, u64 y, const ff::FieldCtx& ctx) {
    if (ctx.m < 1) throw Error("nmext: context must carry a 2-power subgroup (m >= 1)");
    u64 z = ff::addmod(x, y, ctx.q);
    if (z == 0) return BitString::zeros(ctx.m);
    return BitString::from_u64(dlog::dlog_pow2(z, ctx), ctx.m);
}

// log_g(x+y) mod M for arbitrary M >= 1.  When M divides q-1 the residue is
// recoverable from subgroup structure; otherwise the full log is needed and
// only the brute oracle provides it, so q is capped.
inline u64 nmext_general_m(u64 x, u64 y, u64 M, u64 q, u64 g) {
    if (M < 1) throw Error("nmext_general_m: M must be positive");
    u64 z = ff::addmod(x, y, q);
    if (z == 0) return 0;
    if (M == 1) return 0;
    if (q > dlog::kBruteMaxQ)
        throw Error("nmext_general_m: q exceeds the brute-force cap and M does not select a "
                    "tractable subgroup");
    return dlog::dlog_brute(z, q, g) % M;
}

// Full product x*w in GF(2^n); callers slice it.  Exposed so a party that
// needs several ranges of the same product computes it once.
inline BitString ext_product(const BitString& x, const BitString& w, const ff::Gf2Ctx& ctx) {
    return ff::gf2_mul(x, w, ctx);
}

// First m bits of x*w in GF(2^n).
inline BitString strong_ext(const BitString& x, const BitString& w, std::size_t m,
                            const ff::Gf2Ctx& ctx) {
    if (m < 1 || m > ctx.v) throw Error("strong_ext: output length out of range [1,n]");
    return ext_product(x, w, ctx).slice(1, m);
}

// Bits a..b (inclusive, 1-indexed) of x*w in GF(2^n).
inline BitString ext_range(const BitString& x, const BitString& w, std::size_t a, std::size_t b,
                           const ff::Gf2Ctx& ctx) {
    if (a < 1 || b < a || b > ctx.v) throw Error("ext_range: bad bit range");
    return ext_product(x, w, ctx).slice(a, b);
}

// Reduce an arbitrary-length bit string to a field element by Horner
// evaluation of its value mod q (words are base-2^64 digits).  Injective when
// the string is shorter than q's bit length; otherwise a deterministic
// many-to-one embedding both protocol parties share.
inline u64 embed_mod_q(const BitString& x, u64 q) {
    using u128 = unsigned __int128;
    u64 acc = 0;
    u64 base = u64((u128(1) << 64) % q);  // 2^64 mod q
    const auto& words = x.words();
    for (std::size_t i = words.size(); i-- > 0;) {
        acc = u64((u128(acc) * base + words[i]) % q);
    }
    return acc;
}

}  // namespace nmext::extract
