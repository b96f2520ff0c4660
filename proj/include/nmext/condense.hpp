#pragma once

// Somewhere-condenser stand-in.  The basic block splits a string into thirds
// (a, b, c) -- low, middle, high -- and emits the four rows (a, b, c, a*b+c)
// with the product taken in GF(2^(len/3)).  Iterating t times turns one
// n-bit string into 4^t rows of n/3^t bits; the input is zero-padded up to
// the nearest multiple of 3^t first.

#include <cstdint>
#include <map>
#include <vector>

#include "nmext/bitstring.hpp"
#include "nmext/ff.hpp"

namespace nmext::condense {

inline std::vector<BitString> basic_condense(const BitString& x, const ff::Gf2Ctx& third_field) {
    if (x.size() == 0 || x.size() % 3 != 0)
        throw Error("basic_condense: input length must be a positive multiple of 3");
    std::size_t w = x.size() / 3;
    if (third_field.v != w) throw Error("basic_condense: field degree must be len/3");
    BitString a = x.slice(1, w);
    BitString b = x.slice(w + 1, 2 * w);
    BitString c = x.slice(2 * w + 1, 3 * w);
    return {a, b, c, ff::gf2_mul(a, b, third_field) ^ c};
}

inline std::size_t pow_size(std::size_t base, std::uint32_t e) {
    std::size_t r = 1;
    while (e--) r *= base;
    return r;
}

// 4^t rows of ceil-to-3^t(n)/3^t bits; t = 0 returns the input as its only
// row.
inline std::vector<BitString> somewhere_condense(const BitString& x, std::uint32_t t) {
    if (x.size() == 0) throw Error("somewhere_condense: empty input");
    if (t > 8) throw Error("somewhere_condense: iteration depth capped at 8");
    std::size_t block = pow_size(3, t);
    std::size_t padded_len = (x.size() + block - 1) / block * block;
    BitString padded(padded_len);
    for (std::size_t i = 1; i <= x.size(); ++i)
        if (x.bit(i)) padded.set_bit(i, true);
    std::vector<BitString> rows{padded};
    std::map<std::size_t, ff::Gf2Ctx> fields;
    for (std::uint32_t level = 0; level < t; ++level) {
        std::size_t w = rows[0].size() / 3;
        auto it = fields.find(w);
        if (it == fields.end()) it = fields.emplace(w, ff::make_gf2_ctx(std::uint32_t(w))).first;
        std::vector<BitString> next;
        next.reserve(rows.size() * 4);
        for (const BitString& r : rows)
            for (BitString& out : basic_condense(r, it->second)) next.push_back(std::move(out));
        rows = std::move(next);
    }
    return rows;
}

}  // namespace nmext::condense
