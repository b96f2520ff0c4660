#pragma once

// Prime-field and binary-field contexts.
//
// The prime side works over F_q for odd prime q < 2^64 with an optional
// 2-power subgroup structure: FieldCtx records M = 2^m dividing q-1 together
// with the cofactor (q-1)/M and a generator of F_q^*.  The binary side
// provides GF(2^v) arithmetic modulo the lexicographically smallest
// irreducible polynomial of degree v.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "nmext/bitstring.hpp"

namespace nmext::ff {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 mod) { return u64((u128(a) * b) % mod); }

inline u64 addmod(u64 a, u64 b, u64 mod) {
    a %= mod;
    b %= mod;
    u64 s = a + b;
    if (s < a || s >= mod) s -= mod;
    return s;
}

inline u64 pow_mod(u64 base, u64 exp, u64 mod) {
    if (mod == 0) throw Error("pow_mod: zero modulus");
    if (mod == 1) return 0;
    u64 result = 1;
    base %= mod;
    while (exp) {
        if (exp & 1) result = mulmod(result, base, mod);
        base = mulmod(base, base, mod);
        exp >>= 1;
    }
    return result;
}

// Deterministic Miller-Rabin.  The witness set {2,3,...,37} decides primality
// for every n below 3.3 * 10^24, which covers the full 64-bit range.
inline bool is_prime(u64 n) {
    if (n < 2) throw Error("is_prime: n must be at least 2");
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline u64 next_prime(u64 n) {
    u64 c = n < 2 ? 2 : n + 1;
    while (!is_prime(c)) {
        if (c == UINT64_MAX) throw Error("next_prime: no prime above n in range");
        ++c;
    }
    return c;
}

namespace detail {

inline u64 gcd_u64(u64 a, u64 b) {
    while (b) {
        u64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Brent's cycle variant of Pollard rho; n must be odd composite.
inline u64 pollard_rho(u64 n) {
    if (n % 2 == 0) return 2;
    for (u64 c = 1;; ++c) {
        auto step = [&](u64 v) { return addmod(mulmod(v, v, n), c, n); };
        u64 y = 2, r = 1, q = 1, g = 1, x = 0, ys = 0;
        while (g == 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = step(y);
            for (u64 k = 0; k < r && g == 1; k += 128) {
                ys = y;
                for (u64 i = 0; i < std::min<u64>(128, r - k); ++i) {
                    y = step(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = gcd_u64(q, n);
            }
            r <<= 1;
        }
        if (g == n) {
            g = 1;
            while (g == 1) {
                ys = step(ys);
                g = gcd_u64(x > ys ? x - ys : ys - x, n);
            }
        }
        if (g != n) return g;
    }
}

inline void factor_into(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

}  // namespace detail

// Ascending prime multiset with product n.
inline std::vector<u64> factorize(u64 n) {
    if (n < 1) throw Error("factorize: n must be positive");
    std::vector<u64> out;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull,
                  37ull, 41ull, 43ull, 47ull, 53ull, 59ull, 61ull, 67ull, 71ull, 73ull,
                  79ull, 83ull, 89ull, 97ull}) {
        while (n % p == 0) {
            out.push_back(p);
            n /= p;
        }
    }
    if (n > 1) detail::factor_into(n, out);
    std::sort(out.begin(), out.end());
    return out;
}

struct PrimeSearchResult {
    u64 q;      // the prime found
    u64 index;  // q = index*M + 1
};

// Smallest prime q = i*M + 1, scanning i = 1, 2, ...  Throws if the scan
// exhausts max_index or would leave the 64-bit range.
inline PrimeSearchResult find_prime_1_mod_M(u64 M, u64 max_index = u64(1) << 20) {
    if (M < 2) throw Error("find_prime_1_mod_M: M must be at least 2");
    u64 limit = (UINT64_MAX - 1) / M;
    for (u64 i = 1; i <= max_index; ++i) {
        if (i > limit)
            throw Error("find_prime_1_mod_M: search left the 64-bit range at index " +
                        std::to_string(i));
        u64 q = i * M + 1;
        if (q >= 3 && is_prime(q)) return {q, i};
    }
    throw Error("find_prime_1_mod_M: no prime with index <= " + std::to_string(max_index));
}

// Smallest g >= 2 generating F_q^*.  factors is the prime multiset of q-1.
inline u64 find_generator(u64 q, const std::vector<u64>& factors) {
    if (q < 3) throw Error("find_generator: q must be an odd prime");
    std::vector<u64> distinct(factors);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (u64 g = 2; g < q; ++g) {
        bool ok = true;
        for (u64 p : distinct) {
            if (pow_mod(g, (q - 1) / p, q) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw Error("find_generator: no generator found (q not prime?)");
}

struct FieldCtx {
    u64 q = 0;         // odd prime
    std::uint32_t m = 0;  // subgroup exponent; M = 2^m
    u64 M = 1;
    u64 g = 0;         // smallest generator of F_q^*
    u64 cofactor = 0;  // (q-1)/M when m >= 1, else q-1
    std::vector<u64> factors;  // ascending prime multiset of q-1
};

inline FieldCtx make_field_ctx(u64 q, std::uint32_t m) {
    if (q < 3 || q % 2 == 0 || !is_prime(q)) throw Error("make_field_ctx: q must be an odd prime");
    if (m > 62) throw Error("make_field_ctx: m too large for 64-bit moduli");
    FieldCtx ctx;
    ctx.q = q;
    ctx.m = m;
    ctx.M = u64(1) << m;
    if ((q - 1) % ctx.M != 0)
        throw Error("make_field_ctx: 2^m does not divide q-1 (q=" + std::to_string(q) +
                    ", m=" + std::to_string(m) + ")");
    ctx.cofactor = (q - 1) / ctx.M;
    ctx.factors = factorize(q - 1);
    ctx.g = find_generator(q, ctx.factors);
    return ctx;
}

inline nlohmann::json field_ctx_to_json(const FieldCtx& ctx) {
    return nlohmann::json{{"q", ctx.q}, {"m", ctx.m}, {"g", ctx.g}, {"factors", ctx.factors}};
}

// Revalidates everything: a cached context is only trusted after its stated q
// is prime, the factor list multiplies back to q-1 with prime entries, 2^m
// divides q-1, and g passes the generator certificate.
inline FieldCtx field_ctx_from_json(const nlohmann::json& j) {
    FieldCtx ctx;
    ctx.q = j.at("q").get<u64>();
    ctx.m = j.at("m").get<std::uint32_t>();
    ctx.g = j.at("g").get<u64>();
    ctx.factors = j.at("factors").get<std::vector<u64>>();
    if (ctx.q < 3 || !is_prime(ctx.q)) throw Error("field ctx: q is not an odd prime");
    if (ctx.m > 62) throw Error("field ctx: m out of range");
    ctx.M = u64(1) << ctx.m;
    if ((ctx.q - 1) % ctx.M != 0) throw Error("field ctx: 2^m does not divide q-1");
    ctx.cofactor = (ctx.q - 1) / ctx.M;
    u128 prod = 1;
    for (std::size_t i = 0; i < ctx.factors.size(); ++i) {
        u64 p = ctx.factors[i];
        if (!is_prime(p)) throw Error("field ctx: non-prime factor listed");
        if (i > 0 && p < ctx.factors[i - 1]) throw Error("field ctx: factors not ascending");
        prod *= p;
        if (prod > ctx.q - 1) throw Error("field ctx: factor product overflows q-1");
    }
    if (prod != ctx.q - 1) throw Error("field ctx: factors do not multiply to q-1");
    std::vector<u64> distinct(ctx.factors);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (ctx.g < 2 || ctx.g >= ctx.q) throw Error("field ctx: generator out of range");
    for (u64 p : distinct)
        if (pow_mod(ctx.g, (ctx.q - 1) / p, ctx.q) == 1)
            throw Error("field ctx: g fails the generator certificate");
    return ctx;
}

// ---------------------------------------------------------------------------
// GF(2^v)

namespace gf2poly {

// Polynomials over GF(2) as word vectors, bit i of word w = coefficient of
// z^(64w+i).  Degree -1 denotes the zero polynomial.

using Poly = std::vector<u64>;

inline int degree(const Poly& p) {
    for (std::size_t w = p.size(); w-- > 0;)
        if (p[w]) return int(w * 64 + 63 - __builtin_clzll(p[w]));
    return -1;
}

inline void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline bool get_coeff(const Poly& p, std::size_t i) {
    std::size_t w = i >> 6;
    return w < p.size() && ((p[w] >> (i & 63)) & 1);
}

inline void flip_coeff(Poly& p, std::size_t i) {
    std::size_t w = i >> 6;
    if (w >= p.size()) p.resize(w + 1, 0);
    p[w] ^= u64(1) << (i & 63);
}

inline Poly shift_left(const Poly& p, std::size_t k) {
    Poly out((k >> 6) + p.size() + 1, 0);
    std::size_t wshift = k >> 6, bshift = k & 63;
    for (std::size_t w = 0; w < p.size(); ++w) {
        out[w + wshift] ^= p[w] << bshift;
        if (bshift) out[w + wshift + 1] ^= p[w] >> (64 - bshift);
    }
    trim(out);
    return out;
}

inline void add_inplace(Poly& a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0);
    for (std::size_t w = 0; w < b.size(); ++w) a[w] ^= b[w];
    trim(a);
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly out;
    for (std::size_t w = 0; w < b.size(); ++w) {
        u64 word = b[w];
        while (word) {
            int bit = __builtin_ctzll(word);
            word &= word - 1;
            add_inplace(out, shift_left(a, w * 64 + std::size_t(bit)));
        }
    }
    return out;
}

inline Poly mod(Poly a, const Poly& f) {
    int df = degree(f);
    if (df < 0) throw Error("gf2poly: division by zero polynomial");
    int da;
    while ((da = degree(a)) >= df) {
        add_inplace(a, shift_left(f, std::size_t(da - df)));
    }
    return a;
}

inline Poly mulmod(const Poly& a, const Poly& b, const Poly& f) { return mod(mul(a, b), f); }

inline Poly gcd(Poly a, Poly b) {
    while (degree(b) >= 0) {
        Poly r = mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

inline Poly one() { return Poly{1}; }
inline Poly z() { return Poly{2}; }

// z^(2^k) mod f by k repeated squarings.
inline Poly frobenius_power(const Poly& f, std::size_t k) {
    Poly x = mod(z(), f);
    for (std::size_t i = 0; i < k; ++i) x = mulmod(x, x, f);
    return x;
}

inline bool irreducible(const Poly& f) {
    int v = degree(f);
    if (v < 1) return false;
    if (v == 1) return true;
    if (!get_coeff(f, 0)) return false;  // divisible by z
    Poly xv = frobenius_power(f, std::size_t(v));
    Poly x = mod(z(), f);
    add_inplace(xv, x);
    if (degree(xv) >= 0) return false;  // z^(2^v) != z mod f
    std::vector<u64> primes = factorize(u64(v));
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    for (u64 p : primes) {
        Poly xq = frobenius_power(f, std::size_t(v) / p);
        add_inplace(xq, x);
        Poly g = gcd(f, xq);
        if (degree(g) != 0) return false;
    }
    return true;
}

}  // namespace gf2poly

constexpr std::uint32_t kGf2MaxDegree = 4096;

// Lexicographically smallest monic irreducible of degree v: the candidate
// z^v + r is scanned with r ascending as an integer in the coefficient bits.
inline BitString gf2_find_irreducible(std::uint32_t v) {
    if (v < 1 || v > kGf2MaxDegree)
        throw Error("gf2_find_irreducible: degree out of range [1," +
                    std::to_string(kGf2MaxDegree) + "]");
    for (u64 r = 0;; ++r) {
        if (v < 64 && r >= (u64(1) << v))
            throw Error("gf2_find_irreducible: exhausted candidates");
        if (r > (u64(1) << 22))
            throw Error("gf2_find_irreducible: candidate cap exceeded");
        gf2poly::Poly f{r};
        gf2poly::flip_coeff(f, v);
        if (gf2poly::irreducible(f)) {
            BitString poly(v + 1);
            for (std::uint32_t i = 0; i <= v; ++i)
                if (gf2poly::get_coeff(f, i)) poly.set_bit(i + 1, true);
            return poly;
        }
    }
}

struct Gf2Ctx {
    std::uint32_t v = 0;
    BitString poly;  // length v+1, monic, bit i = coefficient of z^(i-1)
};

inline Gf2Ctx make_gf2_ctx(std::uint32_t v) { return Gf2Ctx{v, gf2_find_irreducible(v)}; }

namespace detail {

inline gf2poly::Poly to_poly(const BitString& b) {
    gf2poly::Poly p(b.words());
    gf2poly::trim(p);
    return p;
}

inline BitString to_bits(const gf2poly::Poly& p, std::size_t len) {
    BitString out(len);
    for (std::size_t i = 0; i < len; ++i)
        if (gf2poly::get_coeff(p, i)) out.set_bit(i + 1, true);
    return out;
}

}  // namespace detail

// Product in GF(2^v); both operands are v-bit coefficient vectors.
inline BitString gf2_mul(const BitString& a, const BitString& b, const Gf2Ctx& ctx) {
    if (a.size() != ctx.v || b.size() != ctx.v)
        throw Error("gf2_mul: operands must have exactly " + std::to_string(ctx.v) + " bits");
    gf2poly::Poly prod = gf2poly::mulmod(detail::to_poly(a), detail::to_poly(b),
                                         detail::to_poly(ctx.poly));
    return detail::to_bits(prod, ctx.v);
}

inline BitString gf2_add(const BitString& a, const BitString& b) { return a ^ b; }

}  // namespace nmext::ff
