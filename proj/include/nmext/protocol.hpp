#pragma once

// The two key-agreement protocols.
//
// The one-extraction protocol (fig 1) is two rounds: Alice sends a seed Y,
// Bob answers with a fresh extractor seed W tagged under the key
// R = nmext(X, Y), and both sides output Ext(X, W).
//
// The phased protocol (fig 2) condenses X into C = 4^t rows and runs one
// extraction per row across 2C+1 rounds.  Phase i carries Alice's seed Y_i
// and liveness value S_{i-1}, and Bob's reply W_i is tagged twice: T_i under
// the row key nmext(X_i, Y_i) and, from phase 2 on, L_i under the chained
// key Z_{i-1} sliced out of Ext(X, W_{i-1}).  The final message re-keys
// Z_C from Ext(X, W_C) and authenticates Alice's closing seed W_{C+1},
// which both sides feed to Ext for the output key.
//
// Parameter ledger, from (n, delta, epsilon, t_cond):
//   C = 4^t_cond           rows
//   s = ceil(log2(C/epsilon)) + 4
//   m_nm = 4s              row-extractor output; MAC keys use its prefix
//   v_small = s + ceil(log2 d_seed), v_big = 2 v_small, ell = 2 v_big
//   k = floor(delta n), k_prime = k - (7C+11) s
//   d_seed = n, m_out = min(k_prime - 2s, n)
// Checked mode rejects any infeasible row; unchecked mode clamps m_out to
// [8, n] and runs the mechanics anyway so adversarial behavior stays
// testable at toy sizes.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmext/bitstring.hpp"
#include "nmext/condense.hpp"
#include "nmext/extract.hpp"
#include "nmext/ff.hpp"
#include "nmext/mac.hpp"
#include "nmext/seeding.hpp"

namespace nmext::protocol {

using ff::u64;

enum class Figure { One, Two };

struct ProtocolParams {
    std::uint32_t n = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    std::uint32_t t_cond = 0;
    std::uint32_t C = 1;
    std::uint32_t s = 0;
    std::uint32_t n_pad = 0, n_row = 0;
    std::uint32_t m_nm = 0;
    std::uint32_t v_small = 0, v_big = 0, ell = 0;
    std::int64_t k = 0, k_prime = 0;
    std::uint32_t d_seed = 0;
    std::uint32_t m_out = 0;
    bool checked = true;
};

inline std::uint32_t ceil_log2(u64 v) {
    if (v < 2) return 0;
    std::uint32_t b = 0;
    u64 x = v - 1;
    while (x) {
        x >>= 1;
        ++b;
    }
    return b;
}

inline ProtocolParams derive_params(std::uint32_t n, double delta, double epsilon,
                                    std::uint32_t t_cond, bool checked) {
    if (n < 9) throw Error("derive_params: n too small");
    if (delta <= 0.0 || delta > 1.0) throw Error("derive_params: delta must be in (0,1]");
    if (epsilon <= 0.0 || epsilon >= 1.0) throw Error("derive_params: epsilon must be in (0,1)");
    if (t_cond > 3) throw Error("derive_params: condenser depth capped at 3 (phase byte)");
    ProtocolParams p;
    p.n = n;
    p.delta = delta;
    p.epsilon = epsilon;
    p.t_cond = t_cond;
    p.checked = checked;
    p.C = std::uint32_t(condense::pow_size(4, t_cond));
    p.s = std::uint32_t(std::ceil(std::log2(double(p.C) / epsilon))) + 4;
    std::size_t block = condense::pow_size(3, t_cond);
    p.n_pad = std::uint32_t((n + block - 1) / block * block);
    p.n_row = std::uint32_t(p.n_pad / block);
    p.m_nm = 4 * p.s;
    p.d_seed = n;
    p.v_small = p.s + ceil_log2(p.d_seed);
    p.v_big = 2 * p.v_small;
    p.ell = 2 * p.v_big;
    p.k = std::int64_t(std::floor(delta * double(n)));
    p.k_prime = p.k - std::int64_t(7 * p.C + 11) * p.s;
    std::int64_t m_raw = p.k_prime - 2 * std::int64_t(p.s);
    if (checked) {
        if (p.k_prime < 1)
            throw Error("derive_params: residual entropy k' = " + std::to_string(p.k_prime) +
                        " is not positive; lower epsilon/t_cond or raise delta*n");
        if (m_raw < 1) throw Error("derive_params: no room for output bits after slack");
        p.m_out = std::uint32_t(std::min<std::int64_t>(m_raw, n));
    } else {
        p.m_out = std::uint32_t(std::min<std::int64_t>(std::max<std::int64_t>(m_raw, 8), n));
    }
    return p;
}

// Tag-length override for experiments that pin v directly; dependent lengths
// follow.
inline void set_tag_length(ProtocolParams& p, std::uint32_t v_small) {
    if (v_small < 1) throw Error("set_tag_length: tag length must be positive");
    p.v_small = v_small;
    p.v_big = 2 * v_small;
    p.ell = 2 * p.v_big;
}

constexpr std::uint32_t kNmPowerCap = 48;

struct ProtocolContext {
    ProtocolParams p;
    Figure fig = Figure::Two;
    ff::FieldCtx nm_field;          // q = 1 mod 2^power, power >= m_nm
    std::uint32_t nm_input_width = 0;  // bits of source fed to one nmext call
    std::uint32_t seed_width = 0;      // ceil(log2 q): wire width of Y fields
    ff::Gf2Ctx ext_field;           // GF(2^n) for the strong extractor
    mac::MacParams mac_small;       // v_small tags over d_seed-bit messages
    mac::MacParams mac_big;         // v_big tags over d_seed-bit messages
};

inline ProtocolContext build_context(const ProtocolParams& p, Figure fig) {
    ProtocolContext ctx;
    ctx.p = p;
    ctx.fig = fig;
    ctx.nm_input_width = (fig == Figure::One) ? p.n : p.n_row;
    if (p.m_nm > kNmPowerCap)
        throw Error("build_context: m_nm = " + std::to_string(p.m_nm) +
                    " exceeds the 2^" + std::to_string(kNmPowerCap) + " subgroup cap");
    std::uint32_t power = std::min(std::max(ctx.nm_input_width, p.m_nm), kNmPowerCap);
    auto found = ff::find_prime_1_mod_M(u64(1) << power);
    ctx.nm_field = ff::make_field_ctx(found.q, p.m_nm);
    ctx.seed_width = ceil_log2(found.q);  // q is never a power of two here
    if ((u64(1) << (ctx.seed_width - 1)) >= found.q || ctx.seed_width > 64)
        throw Error("build_context: seed width inconsistent with q");
    if (2 * p.v_small > p.m_nm)
        throw Error("build_context: row extractor output too short to key the tag MAC "
                    "(need 2*v_small <= m_nm)");
    if (p.m_nm > p.n) throw Error("build_context: m_nm exceeds the source length");
    if (fig == Figure::Two && std::size_t(p.s) + p.ell > p.n)
        throw Error("build_context: liveness and chain slices do not fit in n bits");
    if (p.m_out > p.n) throw Error("build_context: m_out exceeds the source length");
    ctx.ext_field = ff::make_gf2_ctx(p.n);
    ctx.mac_small = mac::make_mac_params(p.v_small, p.d_seed);
    if (fig == Figure::Two) ctx.mac_big = mac::make_mac_params(p.v_big, p.d_seed);
    return ctx;
}

// ---------------------------------------------------------------------------
// wire format

enum class Dir : std::uint8_t { AliceToBob = 0, BobToAlice = 1 };

struct Message {
    std::uint8_t phase = 0;
    Dir dir = Dir::AliceToBob;
    std::vector<BitString> fields;
};

// Field widths for (figure, phase, direction), in the order they go on the
// wire.
inline std::vector<std::size_t> message_shape(const ProtocolContext& ctx, std::uint32_t phase,
                                              Dir dir) {
    const ProtocolParams& p = ctx.p;
    if (ctx.fig == Figure::One) {
        if (phase != 1) throw Error("message_shape: single-phase protocol");
        if (dir == Dir::AliceToBob) return {ctx.seed_width};
        return {p.d_seed, p.v_small};
    }
    if (phase < 1 || phase > p.C + 1) throw Error("message_shape: phase out of range");
    if (dir == Dir::AliceToBob) {
        if (phase == 1) return {ctx.seed_width};
        if (phase <= p.C) return {p.s, ctx.seed_width};
        return {p.v_small, p.d_seed};
    }
    if (phase == 1) return {p.d_seed, p.v_small};
    if (phase <= p.C) return {p.d_seed, p.v_small, p.v_big};
    throw Error("message_shape: no reply in the final phase");
}

inline std::vector<std::uint8_t> encode_message(const Message& m) {
    std::vector<std::uint8_t> out;
    out.push_back(m.phase);
    out.push_back(std::uint8_t(m.dir));
    for (const BitString& f : m.fields) {
        if (f.size() > 0xffff) throw Error("encode_message: field too long for the wire");
        out.push_back(std::uint8_t(f.size() >> 8));
        out.push_back(std::uint8_t(f.size() & 0xff));
        std::size_t nbytes = (f.size() + 7) / 8;
        for (std::size_t by = 0; by < nbytes; ++by) {
            std::uint8_t v = 0;
            for (std::size_t bit = 0; bit < 8; ++bit) {
                std::size_t pos = by * 8 + bit + 1;
                if (pos <= f.size() && f.bit(pos)) v |= std::uint8_t(1u << bit);
            }
            out.push_back(v);
        }
    }
    return out;
}

// Strict decode: phase and direction bytes must match what the receiving
// party expects, field count and bit widths must match the shape, padding
// bits must be zero, seed values must lie below q, and no bytes may trail.
inline Message decode_message(const std::vector<std::uint8_t>& bytes, const ProtocolContext& ctx,
                              std::uint32_t expected_phase, Dir expected_dir) {
    std::vector<std::size_t> shape = message_shape(ctx, expected_phase, expected_dir);
    if (bytes.size() < 2) throw Error("decode_message: truncated header");
    if (bytes[0] != expected_phase)
        throw Error("decode_message: phase tag " + std::to_string(bytes[0]) + " where " +
                    std::to_string(expected_phase) + " was expected");
    if (bytes[1] != std::uint8_t(expected_dir)) throw Error("decode_message: direction mismatch");
    Message m;
    m.phase = bytes[0];
    m.dir = expected_dir;
    std::size_t at = 2;
    for (std::size_t want : shape) {
        if (at + 2 > bytes.size()) throw Error("decode_message: truncated length prefix");
        std::size_t len = (std::size_t(bytes[at]) << 8) | bytes[at + 1];
        at += 2;
        if (len != want)
            throw Error("decode_message: field of " + std::to_string(len) + " bits where " +
                        std::to_string(want) + " was expected");
        std::size_t nbytes = (len + 7) / 8;
        if (at + nbytes > bytes.size()) throw Error("decode_message: truncated field body");
        BitString f(len);
        for (std::size_t by = 0; by < nbytes; ++by) {
            std::uint8_t v = bytes[at + by];
            for (std::size_t bit = 0; bit < 8; ++bit) {
                std::size_t pos = by * 8 + bit + 1;
                if (pos <= len) {
                    if (v & (1u << bit)) f.set_bit(pos, true);
                } else if (v & (1u << bit)) {
                    throw Error("decode_message: nonzero padding bits");
                }
            }
        }
        m.fields.push_back(std::move(f));
        at += nbytes;
    }
    if (at != bytes.size()) throw Error("decode_message: trailing bytes");
    // Seed fields carry field elements and must stay below q.
    if (expected_dir == Dir::AliceToBob && expected_phase <= ctx.p.C && ctx.fig == Figure::Two) {
        if (m.fields.back().to_u64() >= ctx.nm_field.q)
            throw Error("decode_message: seed value outside the field");
    }
    if (expected_dir == Dir::AliceToBob && ctx.fig == Figure::One) {
        if (m.fields[0].to_u64() >= ctx.nm_field.q)
            throw Error("decode_message: seed value outside the field");
    }
    return m;
}

// ---------------------------------------------------------------------------
// parties

enum class Terminal { None, Accept, Reject };

namespace detail {

inline BitString mac_key_slice(const BitString& r, const mac::MacParams& mp) {
    return r.slice(1, 2 * mp.v);
}

inline std::vector<u64> embed_rows(const ProtocolContext& ctx, const BitString& x) {
    if (ctx.fig == Figure::One) return {extract::embed_mod_q(x, ctx.nm_field.q)};
    std::vector<BitString> rows = condense::somewhere_condense(x, ctx.p.t_cond);
    if (rows.size() != ctx.p.C) throw Error("internal: condenser row count mismatch");
    std::vector<u64> elems;
    elems.reserve(rows.size());
    for (const BitString& r : rows) elems.push_back(extract::embed_mod_q(r, ctx.nm_field.q));
    return elems;
}

}  // namespace detail

struct AliceState {
    const ProtocolContext* ctx = nullptr;
    BitString x;
    RandTape tape{0};
    std::uint32_t next_call = 1;
    Terminal terminal = Terminal::None;
    std::optional<BitString> key;

    std::vector<u64> row_elems;
    std::vector<u64> y;    // y[i-1] = seed sent in phase i
    BitString z_prev;      // chain key from the previous phase's W
};

struct BobState {
    const ProtocolContext* ctx = nullptr;
    BitString x;
    RandTape tape{0};
    std::uint32_t next_call = 1;
    Terminal terminal = Terminal::None;
    std::optional<BitString> key;

    std::vector<u64> row_elems;
    std::vector<BitString> w;         // w[i-1] = seed sent in phase i
    std::vector<BitString> products;  // Ext products x*w[i-1]
};

inline AliceState make_alice(const ProtocolContext& ctx, const BitString& x, u64 tape_seed) {
    if (x.size() != ctx.p.n) throw Error("make_alice: source length mismatch");
    AliceState st;
    st.ctx = &ctx;
    st.x = x;
    st.tape = RandTape(tape_seed);
    st.row_elems = detail::embed_rows(ctx, x);
    return st;
}

inline BobState make_bob(const ProtocolContext& ctx, const BitString& x, u64 tape_seed) {
    if (x.size() != ctx.p.n) throw Error("make_bob: source length mismatch");
    BobState st;
    st.ctx = &ctx;
    st.x = x;
    st.tape = RandTape(tape_seed);
    st.row_elems = detail::embed_rows(ctx, x);
    return st;
}

// One oracle call to Alice.  The first call takes no payload and emits the
// phase-1 message; call i consumes the (i-1)-phase reply and emits phase i.
// A party that has reached a terminal state emits nothing forever after.
inline std::optional<std::vector<std::uint8_t>> alice_step(
    AliceState& st, const std::optional<std::vector<std::uint8_t>>& in) {
    const ProtocolContext& ctx = *st.ctx;
    const ProtocolParams& p = ctx.p;
    if (st.terminal != Terminal::None) return std::nullopt;
    std::uint32_t call = st.next_call++;
    auto reject = [&]() -> std::optional<std::vector<std::uint8_t>> {
        st.terminal = Terminal::Reject;
        return std::nullopt;
    };

    if (call == 1) {
        if (in && !in->empty()) return reject();
        u64 y1 = st.tape.draw_below(ctx.nm_field.q);
        st.y.push_back(y1);
        Message m{1, Dir::AliceToBob, {BitString::from_u64(y1, ctx.seed_width)}};
        return encode_message(m);
    }

    if (!in) return reject();
    std::uint32_t prev = call - 1;  // phase of the reply being consumed

    if (ctx.fig == Figure::One) {
        if (call != 2) return reject();
        Message m;
        try {
            m = decode_message(*in, ctx, 1, Dir::BobToAlice);
        } catch (const Error&) {
            return reject();
        }
        const BitString& w = m.fields[0];
        const BitString& tag = m.fields[1];
        BitString r = extract::nmext(st.row_elems[0], st.y[0], ctx.nm_field);
        if (!mac::mac_verify(detail::mac_key_slice(r, ctx.mac_small), w, tag, ctx.mac_small))
            return reject();
        st.key = extract::strong_ext(st.x, w, p.m_out, ctx.ext_field);
        st.terminal = Terminal::Accept;
        return std::nullopt;
    }

    if (prev > p.C) return reject();
    Message m;
    try {
        m = decode_message(*in, ctx, prev, Dir::BobToAlice);
    } catch (const Error&) {
        return reject();
    }
    const BitString& w = m.fields[0];
    const BitString& tag = m.fields[1];
    if (prev >= 2) {
        const BitString& chain = m.fields[2];
        if (!mac::mac_verify(st.z_prev, w, chain, ctx.mac_big)) return reject();
    }
    BitString r = extract::nmext(st.row_elems[prev - 1], st.y[prev - 1], ctx.nm_field);
    if (!mac::mac_verify(detail::mac_key_slice(r, ctx.mac_small), w, tag, ctx.mac_small))
        return reject();
    BitString product = extract::ext_product(st.x, w, ctx.ext_field);
    if (prev < p.C) {
        BitString liveness = product.slice(1, p.s);
        st.z_prev = product.slice(p.s + 1, p.s + p.ell);
        u64 ynext = st.tape.draw_below(ctx.nm_field.q);
        st.y.push_back(ynext);
        Message next{std::uint8_t(prev + 1), Dir::AliceToBob,
                     {liveness, BitString::from_u64(ynext, ctx.seed_width)}};
        return encode_message(next);
    }
    // Final phase: re-key the chain from W_C and close.
    BitString z_c = product.slice(1, p.m_nm);
    BitString w_final = st.tape.draw_bits(p.d_seed);
    BitString s_c = mac::mac_tag(detail::mac_key_slice(z_c, ctx.mac_small), w_final, ctx.mac_small);
    st.key = extract::strong_ext(st.x, w_final, p.m_out, ctx.ext_field);
    st.terminal = Terminal::Accept;
    Message fin{std::uint8_t(p.C + 1), Dir::AliceToBob, {s_c, w_final}};
    return encode_message(fin);
}

// One oracle call to Bob; call i consumes Alice's phase-i message.  The
// final call verifies the closing tag and terminates without a reply.
inline std::optional<std::vector<std::uint8_t>> bob_step(BobState& st,
                                                         const std::vector<std::uint8_t>& in) {
    const ProtocolContext& ctx = *st.ctx;
    const ProtocolParams& p = ctx.p;
    if (st.terminal != Terminal::None) return std::nullopt;
    std::uint32_t call = st.next_call++;
    auto reject = [&]() -> std::optional<std::vector<std::uint8_t>> {
        st.terminal = Terminal::Reject;
        return std::nullopt;
    };

    if (ctx.fig == Figure::One) {
        if (call != 1) return reject();
        Message m;
        try {
            m = decode_message(in, ctx, 1, Dir::AliceToBob);
        } catch (const Error&) {
            return reject();
        }
        u64 y = m.fields[0].to_u64();
        BitString w = st.tape.draw_bits(p.d_seed);
        BitString r = extract::nmext(st.row_elems[0], y, ctx.nm_field);
        BitString tag = mac::mac_tag(detail::mac_key_slice(r, ctx.mac_small), w, ctx.mac_small);
        st.key = extract::strong_ext(st.x, w, p.m_out, ctx.ext_field);
        st.terminal = Terminal::Accept;
        return encode_message(Message{1, Dir::BobToAlice, {w, tag}});
    }

    if (call <= p.C) {
        Message m;
        try {
            m = decode_message(in, ctx, call, Dir::AliceToBob);
        } catch (const Error&) {
            return reject();
        }
        u64 y;
        if (call == 1) {
            y = m.fields[0].to_u64();
        } else {
            const BitString& liveness = m.fields[0];
            y = m.fields[1].to_u64();
            const BitString& prev_product = st.products[call - 2];
            if (liveness != prev_product.slice(1, p.s)) return reject();
        }
        BitString w = st.tape.draw_bits(p.d_seed);
        BitString product = extract::ext_product(st.x, w, ctx.ext_field);
        BitString r = extract::nmext(st.row_elems[call - 1], y, ctx.nm_field);
        BitString tag = mac::mac_tag(detail::mac_key_slice(r, ctx.mac_small), w, ctx.mac_small);
        Message reply{std::uint8_t(call), Dir::BobToAlice, {w, tag}};
        if (call >= 2) {
            const BitString& prev_product = st.products[call - 2];
            BitString z_prev = prev_product.slice(p.s + 1, p.s + p.ell);
            reply.fields.push_back(mac::mac_tag(z_prev, w, ctx.mac_big));
        }
        st.w.push_back(w);
        st.products.push_back(std::move(product));
        return encode_message(reply);
    }

    if (call == p.C + 1) {
        Message m;
        try {
            m = decode_message(in, ctx, p.C + 1, Dir::AliceToBob);
        } catch (const Error&) {
            return reject();
        }
        const BitString& s_c = m.fields[0];
        const BitString& w_final = m.fields[1];
        BitString z_c = st.products[p.C - 1].slice(1, p.m_nm);
        if (!mac::mac_verify(detail::mac_key_slice(z_c, ctx.mac_small), w_final, s_c,
                             ctx.mac_small))
            return reject();
        st.key = extract::strong_ext(st.x, w_final, p.m_out, ctx.ext_field);
        st.terminal = Terminal::Accept;
        return std::nullopt;
    }
    return reject();
}

}  // namespace nmext::protocol
