#pragma once

// One-time polynomial MAC over GF(2^v).  The key is a pair (a, b); the
// message is padded with a single 1 bit then zeros to a multiple of v, split
// into v-bit chunks w_1..w_t, and the tag is b + sum_i w_i * a^i.
//
// For messages of one fixed length the padding chunks cancel in any tag
// difference, so the forgery probability of the one-time game is at most
// ceil(d/v) * 2^-v; mixed-length pairs can pick up one extra chunk, giving
// ceil((d+1)/v) * 2^-v.  mac_max_forgery plays the fixed-length game
// exhaustively (the form the security definition quantifies over); the
// mixed-length bound is exercised by the unit suite.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "nmext/bitstring.hpp"
#include "nmext/ff.hpp"
#include "nmext/rational.hpp"

namespace nmext::mac {

using ff::u64;

struct MacParams {
    std::uint32_t v = 0;       // tag length; key length is 2v
    std::uint32_t d = 0;       // maximum message length
    std::uint32_t chunks = 0;  // ceil(d/v), the fixed-length security factor
    ff::Gf2Ctx field;          // GF(2^v)
};

inline MacParams make_mac_params(std::uint32_t v, std::uint32_t d) {
    if (v < 1) throw Error("mac: tag length must be at least 1");
    MacParams p;
    p.v = v;
    p.d = d;
    p.chunks = (d + v - 1) / v;
    p.field = ff::make_gf2_ctx(v);
    return p;
}

// Padded chunk sequence: msg || 1 || 0...0 cut into v-bit pieces, low bits
// first.
inline std::vector<BitString> mac_chunks(const BitString& msg, const MacParams& p) {
    std::size_t padded_len = ((msg.size() + 1 + p.v - 1) / p.v) * p.v;
    BitString padded(padded_len);
    for (std::size_t i = 1; i <= msg.size(); ++i)
        if (msg.bit(i)) padded.set_bit(i, true);
    padded.set_bit(msg.size() + 1, true);
    std::vector<BitString> out;
    for (std::size_t c = 0; c < padded_len / p.v; ++c)
        out.push_back(padded.slice(c * p.v + 1, (c + 1) * p.v));
    return out;
}

inline BitString mac_tag(const BitString& key, const BitString& msg, const MacParams& p) {
    if (key.size() != 2 * p.v) throw Error("mac_tag: key must have exactly 2v bits");
    if (msg.size() > p.d) throw Error("mac_tag: message longer than declared maximum");
    BitString a = key.slice(1, p.v);
    BitString b = key.slice(p.v + 1, 2 * p.v);
    BitString acc = b;
    BitString apow = a;
    for (const BitString& w : mac_chunks(msg, p)) {
        acc = acc ^ ff::gf2_mul(w, apow, p.field);
        apow = ff::gf2_mul(apow, a, p.field);
    }
    return acc;
}

inline bool mac_verify(const BitString& key, const BitString& msg, const BitString& tag,
                       const MacParams& p) {
    if (tag.size() != p.v) throw Error("mac_verify: tag must have exactly v bits");
    return mac_tag(key, msg, p) == tag;
}

namespace detail {

// tag_table[msg_value][key_value] over all d-bit messages and 2v-bit keys.
inline std::vector<std::vector<std::uint16_t>> tag_table(const MacParams& p) {
    if (p.v > 8 || p.d > 16)
        throw Error("mac exhaustive oracle: range capped at v <= 8, d <= 16");
    std::size_t nmsg = std::size_t(1) << p.d;
    std::size_t nkey = std::size_t(1) << (2 * p.v);
    std::vector<std::vector<std::uint16_t>> table(nmsg, std::vector<std::uint16_t>(nkey));
    for (std::size_t mv = 0; mv < nmsg; ++mv) {
        BitString msg = BitString::from_u64(mv, p.d);
        for (std::size_t kv = 0; kv < nkey; ++kv) {
            BitString key = BitString::from_u64(kv, 2 * p.v);
            table[mv][kv] = std::uint16_t(mac_tag(key, msg, p).to_u64());
        }
    }
    return table;
}

}  // namespace detail

// Exact optimum of the one-time forgery game over d-bit messages: the
// adversary fixes w, sees tag(w) under a uniform key, and answers with the
// best (w', t') per observed tag.  Returns max over w of the success mass
// divided by the key count.
inline Rat mac_max_forgery(const MacParams& p) {
    if (p.d == 0) return Rat(0);  // one message only, no distinct forgery target
    auto tags = detail::tag_table(p);
    std::size_t nmsg = std::size_t(1) << p.d;
    std::size_t nkey = std::size_t(1) << (2 * p.v);
    std::size_t ntag = std::size_t(1) << p.v;
    Int best_overall = 0;
    std::vector<std::uint32_t> best(ntag);
    std::vector<std::uint32_t> joint(ntag * ntag);
    for (std::size_t w = 0; w < nmsg; ++w) {
        std::fill(best.begin(), best.end(), 0u);
        for (std::size_t wp = 0; wp < nmsg; ++wp) {
            if (wp == w) continue;
            std::fill(joint.begin(), joint.end(), 0u);
            for (std::size_t k = 0; k < nkey; ++k)
                ++joint[std::size_t(tags[w][k]) * ntag + tags[wp][k]];
            for (std::size_t t = 0; t < ntag; ++t) {
                std::uint32_t m = 0;
                for (std::size_t tp = 0; tp < ntag; ++tp)
                    m = std::max(m, joint[t * ntag + tp]);
                best[t] = std::max(best[t], m);
            }
        }
        Int success = 0;
        for (std::size_t t = 0; t < ntag; ++t) success += best[t];
        best_overall = std::max(best_overall, success);
    }
    return Rat(best_overall, Int(nkey));
}

// Same game when the adversary also sees leak(key) before choosing the
// message to have tagged: success is summed over leak classes, with both the
// tagged message and the forgery response optimized per class.  leak maps
// each 2v-bit key value to a small label.
inline Rat mac_max_forgery_leaky(const MacParams& p, const std::vector<std::uint32_t>& leak) {
    std::size_t nkey = std::size_t(1) << (2 * p.v);
    if (leak.size() != nkey) throw Error("mac_max_forgery_leaky: leak table must cover all keys");
    if (p.d == 0) return Rat(0);
    auto tags = detail::tag_table(p);
    std::size_t nmsg = std::size_t(1) << p.d;
    std::size_t ntag = std::size_t(1) << p.v;
    std::uint32_t nclass = 0;
    for (auto e : leak) nclass = std::max(nclass, e + 1);
    std::vector<std::vector<std::uint32_t>> keys_by_class(nclass);
    for (std::size_t k = 0; k < nkey; ++k) keys_by_class[leak[k]].push_back(std::uint32_t(k));
    Int total = 0;
    std::vector<std::uint32_t> best(ntag);
    std::vector<std::uint32_t> joint(ntag * ntag);
    for (const auto& keys : keys_by_class) {
        if (keys.empty()) continue;
        Int class_best = 0;
        for (std::size_t w = 0; w < nmsg; ++w) {
            std::fill(best.begin(), best.end(), 0u);
            for (std::size_t wp = 0; wp < nmsg; ++wp) {
                if (wp == w) continue;
                std::fill(joint.begin(), joint.end(), 0u);
                for (std::uint32_t k : keys)
                    ++joint[std::size_t(tags[w][k]) * ntag + tags[wp][k]];
                for (std::size_t t = 0; t < ntag; ++t) {
                    std::uint32_t m = 0;
                    for (std::size_t tp = 0; tp < ntag; ++tp)
                        m = std::max(m, joint[t * ntag + tp]);
                    best[t] = std::max(best[t], m);
                }
            }
            Int success = 0;
            for (std::size_t t = 0; t < ntag; ++t) success += best[t];
            class_best = std::max(class_best, success);
        }
        total += class_best;
    }
    return Rat(total, Int(nkey));
}

}  // namespace nmext::mac
