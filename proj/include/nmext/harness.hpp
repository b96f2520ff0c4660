#pragma once

// Active-adversary simulator.  Eve owns the wire: she decides which party's
// oracle to call next and what bytes to deliver, within a budget of C+1
// calls per side.  A session is synchronous while the calls follow the
// alternating order A1 B1 A2 B2 ... and every delivered payload is the
// verbatim output of the peer's preceding call; the first deviation makes it
// permanently non-synchronous.  Each party's accept is snapshotted against
// the synchrony flag at that moment, so a tamper that lands after Alice
// already accepted does not retroactively taint her accept.
//
// Strategies are deterministic given the Eve tape.  run_trials replays
// independent sessions with per-trial derived seeds and reduces to counter
// totals plus a per-strategy bound verdict.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmext/analysis.hpp"
#include "nmext/bitstring.hpp"
#include "nmext/distribution.hpp"
#include "nmext/protocol.hpp"
#include "nmext/seeding.hpp"

namespace nmext::harness {

using ff::u64;
using protocol::Dir;
using protocol::ProtocolContext;
using protocol::Terminal;

struct CallRecord {
    std::string label;  // "A2", "B1", ...
    std::optional<std::vector<std::uint8_t>> in;
    std::optional<std::vector<std::uint8_t>> out;
    Terminal after = Terminal::None;
};

struct SessionOutcome {
    Terminal a_term = Terminal::None;
    Terminal b_term = Terminal::None;
    std::optional<BitString> r_a, r_b;
    bool synchronous = true;
    bool alice_accept_in_sync = false;
    bool bob_accept_in_sync = false;
    bool budget_violation = false;
    std::vector<CallRecord> transcript;
};

struct EveView {
    const ProtocolContext* ctx = nullptr;
    std::uint32_t alice_calls = 0, bob_calls = 0;
    bool alice_terminal = false, bob_terminal = false;
    std::optional<std::vector<std::uint8_t>> last_alice_out, last_bob_out;
    RandTape* tape = nullptr;
    // Populated only when the session runs with post-application key grants.
    std::optional<BitString> granted_r_a, granted_r_b;
    const std::vector<CallRecord>* transcript = nullptr;
};

struct EveAction {
    enum class Kind { CallAlice, CallBob, Halt } kind = Kind::Halt;
    std::optional<std::vector<std::uint8_t>> payload;
};

class Strategy {
  public:
    virtual ~Strategy() = default;
    virtual EveAction step(EveView& view) = 0;
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// relay base: follows the canonical order, with a payload hook

class RelayStrategy : public Strategy {
  public:
    EveAction step(EveView& view) override {
        const protocol::ProtocolParams& p = view.ctx->p;
        std::uint32_t rounds = (view.ctx->fig == protocol::Figure::One) ? 1 : p.C + 1;
        if (view.alice_terminal && view.bob_terminal) return {EveAction::Kind::Halt, {}};
        if (view.alice_calls == view.bob_calls) {
            std::uint32_t call = view.alice_calls + 1;
            std::uint32_t alice_budget = (view.ctx->fig == protocol::Figure::One) ? 2 : p.C + 1;
            if (call > alice_budget) return {EveAction::Kind::Halt, {}};
            if (call == 1) return {EveAction::Kind::CallAlice, std::nullopt};
            if (!view.last_bob_out) return {EveAction::Kind::Halt, {}};
            std::vector<std::uint8_t> bytes =
                transform(*view.last_bob_out, view.bob_calls, Dir::BobToAlice, view);
            return {EveAction::Kind::CallAlice, std::move(bytes)};
        }
        std::uint32_t phase = view.alice_calls;  // Alice's latest phase
        if (view.bob_calls >= rounds) return {EveAction::Kind::Halt, {}};
        if (!view.last_alice_out) return {EveAction::Kind::Halt, {}};
        std::vector<std::uint8_t> bytes =
            transform(*view.last_alice_out, phase, Dir::AliceToBob, view);
        return {EveAction::Kind::CallBob, std::move(bytes)};
    }

  protected:
    virtual std::vector<std::uint8_t> transform(const std::vector<std::uint8_t>& bytes,
                                                std::uint32_t, Dir, EveView&) {
        return bytes;
    }
};

class PassiveStrategy final : public RelayStrategy {
  public:
    std::string name() const override { return "passive"; }
};

// Adds a constant to the seed field of one Alice message.
class FlipSeedStrategy final : public RelayStrategy {
  public:
    FlipSeedStrategy(std::uint32_t phase, u64 delta) : phase_(phase), delta_(delta) {}
    std::string name() const override { return "flip_seed"; }

  protected:
    std::vector<std::uint8_t> transform(const std::vector<std::uint8_t>& bytes,
                                        std::uint32_t phase, Dir dir, EveView& view) override {
        if (dir != Dir::AliceToBob || phase != phase_) return bytes;
        try {
            protocol::Message m = protocol::decode_message(bytes, *view.ctx, phase, dir);
            BitString& seed = m.fields.back();
            u64 q = view.ctx->nm_field.q;
            u64 y = ff::addmod(seed.to_u64(), delta_ % q, q);
            seed = BitString::from_u64(y, view.ctx->seed_width);
            return protocol::encode_message(m);
        } catch (const Error&) {
            return bytes;
        }
    }

  private:
    std::uint32_t phase_;
    u64 delta_;
};

// Flips one bit of one field, located structurally (no decode).
class TamperTagStrategy final : public RelayStrategy {
  public:
    TamperTagStrategy(std::uint32_t phase, Dir dir, std::size_t field, std::size_t bit)
        : phase_(phase), dir_(dir), field_(field), bit_(bit) {}
    std::string name() const override { return "tamper_tag"; }

  protected:
    std::vector<std::uint8_t> transform(const std::vector<std::uint8_t>& bytes,
                                        std::uint32_t phase, Dir dir, EveView&) override {
        if (phase != phase_ || dir != dir_) return bytes;
        std::vector<std::uint8_t> out = bytes;
        std::size_t at = 2;
        for (std::size_t f = 0;; ++f) {
            if (at + 2 > out.size()) return bytes;
            std::size_t len = (std::size_t(out[at]) << 8) | out[at + 1];
            at += 2;
            if (f == field_) {
                if (bit_ < 1 || bit_ > len) return bytes;
                out[at + (bit_ - 1) / 8] ^= std::uint8_t(1u << ((bit_ - 1) % 8));
                return out;
            }
            at += (len + 7) / 8;
        }
    }

  private:
    std::uint32_t phase_;
    Dir dir_;
    std::size_t field_, bit_;
};

// Replaces the seed W in one Bob message, keeping the tags.  Modes:
//   random     fresh W' off the Eve tape
//   mask       W' = W xor a fixed mask
//   worstcase  W' = W xor D where the chunk difference D encodes
//              a * prod_j (a + j), a tag-collision polynomial with the
//              maximum number of roots; acceptance then sits at the
//              ceil(d/v) 2^-v forgery optimum when the key is uniform
class SubstituteWStrategy final : public RelayStrategy {
  public:
    enum class Mode { Random, Mask, WorstCase };
    SubstituteWStrategy(std::uint32_t phase, Mode mode, BitString mask)
        : phase_(phase), mode_(mode), mask_(std::move(mask)) {}
    std::string name() const override { return "substitute_w"; }

    static BitString worstcase_delta(const mac::MacParams& mp) {
        // coefficients of a * (a+1) * ... * (a+chunks-1) over GF(2^v),
        // low-degree first; coeff[0] is the a^1 coefficient
        std::vector<BitString> coeff{BitString::from_u64(1, mp.v)};
        for (std::size_t j = 1; j + 1 <= mp.chunks; ++j) {
            BitString root = BitString::from_u64(j, mp.v);
            std::vector<BitString> next(coeff.size() + 1, BitString(mp.v));
            for (std::size_t i = 0; i < coeff.size(); ++i) {
                next[i + 1] = next[i + 1] ^ coeff[i];
                next[i] = next[i] ^ ff::gf2_mul(coeff[i], root, mp.field);
            }
            coeff = std::move(next);
        }
        BitString delta(mp.d);
        for (std::size_t pos = 1; pos <= mp.d; ++pos) {
            std::size_t chunk = (pos - 1) / mp.v;  // 0-based, holds a^{chunk+1}
            std::size_t inner = (pos - 1) % mp.v + 1;
            if (chunk < coeff.size() && coeff[chunk].bit(inner)) delta.set_bit(pos, true);
        }
        // bits of the top coefficients that would land in the padding cannot
        // be expressed; the construction stays valid only if none are set
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            for (std::size_t inner = 1; inner <= mp.v; ++inner) {
                std::size_t pos = i * mp.v + inner;
                if (pos > mp.d && coeff[i].bit(inner))
                    throw Error("worstcase_delta: collision polynomial does not fit the "
                                "message length");
            }
        }
        if (delta.is_zero()) throw Error("worstcase_delta: empty difference");
        return delta;
    }

  protected:
    std::vector<std::uint8_t> transform(const std::vector<std::uint8_t>& bytes,
                                        std::uint32_t phase, Dir dir, EveView& view) override {
        if (dir != Dir::BobToAlice || phase != phase_) return bytes;
        try {
            protocol::Message m = protocol::decode_message(bytes, *view.ctx, phase, dir);
            BitString& w = m.fields[0];
            switch (mode_) {
                case Mode::Random:
                    w = view.tape->draw_bits(w.size());
                    break;
                case Mode::Mask:
                    if (mask_.size() != w.size()) return bytes;
                    w = w ^ mask_;
                    break;
                case Mode::WorstCase:
                    w = w ^ worstcase_delta(view.ctx->mac_small);
                    break;
            }
            return protocol::encode_message(m);
        } catch (const Error&) {
            return bytes;
        }
    }

  private:
    std::uint32_t phase_;
    Mode mode_;
    BitString mask_;
};

// Re-delivers the previous phase's Alice message in place of phase `phase`.
class ReplayStrategy final : public RelayStrategy {
  public:
    explicit ReplayStrategy(std::uint32_t phase) : phase_(phase) {
        if (phase < 2) throw Error("replay: needs a phase with a predecessor");
    }
    std::string name() const override { return "replay"; }

  protected:
    std::vector<std::uint8_t> transform(const std::vector<std::uint8_t>& bytes,
                                        std::uint32_t phase, Dir dir, EveView&) override {
        if (dir != Dir::AliceToBob) return bytes;
        history_[phase] = bytes;
        if (phase == phase_) {
            auto it = history_.find(phase - 1);
            if (it != history_.end()) return it->second;
        }
        return bytes;
    }

  private:
    std::uint32_t phase_;
    std::map<std::uint32_t, std::vector<std::uint8_t>> history_;
};

// Relays honestly below from_phase, then cuts Alice off and fabricates her
// remaining messages from the Eve tape.  from_phase = C+1 forges only the
// closing message.
class DesyncSkipAliceStrategy final : public Strategy {
  public:
    explicit DesyncSkipAliceStrategy(std::uint32_t from_phase) : from_phase_(from_phase) {
        if (from_phase < 1) throw Error("desync_skip_alice: bad phase");
    }
    std::string name() const override { return "desync_skip_alice"; }

    EveAction step(EveView& view) override {
        const ProtocolContext& ctx = *view.ctx;
        const protocol::ProtocolParams& p = ctx.p;
        std::uint32_t rounds = (ctx.fig == protocol::Figure::One) ? 1 : p.C + 1;
        if (view.bob_terminal || view.bob_calls >= rounds) return {EveAction::Kind::Halt, {}};
        std::uint32_t next_phase = view.bob_calls + 1;
        if (next_phase < from_phase_) {
            if (view.alice_calls < next_phase) {
                if (view.alice_calls == 0) return {EveAction::Kind::CallAlice, std::nullopt};
                if (!view.last_bob_out) return {EveAction::Kind::Halt, {}};
                return {EveAction::Kind::CallAlice, *view.last_bob_out};
            }
            if (!view.last_alice_out) return {EveAction::Kind::Halt, {}};
            return {EveAction::Kind::CallBob, *view.last_alice_out};
        }
        return {EveAction::Kind::CallBob, fabricate(view, next_phase)};
    }

  private:
    std::vector<std::uint8_t> fabricate(EveView& view, std::uint32_t phase) {
        const ProtocolContext& ctx = *view.ctx;
        const protocol::ProtocolParams& p = ctx.p;
        protocol::Message m;
        m.phase = std::uint8_t(phase);
        m.dir = Dir::AliceToBob;
        auto draw_seed = [&]() {
            return BitString::from_u64(view.tape->draw_below(ctx.nm_field.q), ctx.seed_width);
        };
        if (ctx.fig == protocol::Figure::One || phase == 1) {
            m.fields = {draw_seed()};
        } else if (phase <= p.C) {
            m.fields = {view.tape->draw_bits(p.s), draw_seed()};
        } else {
            m.fields = {view.tape->draw_bits(p.v_small), view.tape->draw_bits(p.d_seed)};
        }
        return protocol::encode_message(m);
    }

    std::uint32_t from_phase_;
};

inline std::unique_ptr<Strategy> make_strategy(const std::string& name, const nlohmann::json& cfg,
                                               const ProtocolContext& ctx) {
    auto get_u32 = [&](const char* key, std::uint32_t fallback) -> std::uint32_t {
        if (cfg.contains(key)) return cfg.at(key).get<std::uint32_t>();
        return fallback;
    };
    if (name == "passive") return std::make_unique<PassiveStrategy>();
    if (name == "flip_seed") {
        std::uint32_t phase = get_u32("phase", 1);
        u64 delta = cfg.contains("delta") ? cfg.at("delta").get<u64>() : 1;
        std::uint32_t last_seed_phase = (ctx.fig == protocol::Figure::One) ? 1 : ctx.p.C;
        if (phase < 1 || phase > last_seed_phase)
            throw Error("flip_seed: phase " + std::to_string(phase) + " carries no seed");
        if (delta % ctx.nm_field.q == 0) throw Error("flip_seed: delta is a no-op");
        return std::make_unique<FlipSeedStrategy>(phase, delta);
    }
    if (name == "tamper_tag") {
        std::uint32_t phase = get_u32("phase", 1);
        std::string dir_s = cfg.contains("dir") ? cfg.at("dir").get<std::string>() : "b2a";
        Dir dir = (dir_s == "a2b") ? Dir::AliceToBob : Dir::BobToAlice;
        std::size_t field = get_u32("field", 1);
        std::size_t bit = get_u32("bit", 1);
        return std::make_unique<TamperTagStrategy>(phase, dir, field, bit);
    }
    if (name == "substitute_w") {
        std::uint32_t phase = get_u32("phase", 1);
        std::string mode_s = cfg.contains("mode") ? cfg.at("mode").get<std::string>() : "random";
        SubstituteWStrategy::Mode mode = SubstituteWStrategy::Mode::Random;
        BitString mask(1);
        if (mode_s == "mask") {
            mode = SubstituteWStrategy::Mode::Mask;
            mask = BitString::from_hex(cfg.at("mask").get<std::string>());
        } else if (mode_s == "worstcase") {
            mode = SubstituteWStrategy::Mode::WorstCase;
        } else if (mode_s != "random") {
            throw Error("substitute_w: unknown mode " + mode_s);
        }
        return std::make_unique<SubstituteWStrategy>(phase, mode, std::move(mask));
    }
    if (name == "replay") return std::make_unique<ReplayStrategy>(get_u32("phase", 2));
    if (name == "desync_skip_alice")
        return std::make_unique<DesyncSkipAliceStrategy>(get_u32("from_phase", 2));
    if (name == "final_forge") {
        std::uint32_t fin = (ctx.fig == protocol::Figure::One) ? 1 : ctx.p.C + 1;
        return std::make_unique<DesyncSkipAliceStrategy>(fin);
    }
    throw Error("make_strategy: unknown strategy " + name);
}

// ---------------------------------------------------------------------------
// session driver

inline SessionOutcome run_session(const ProtocolContext& ctx, const BitString& x, Strategy& strat,
                                  u64 alice_seed, u64 bob_seed, u64 eve_seed,
                                  bool post_application = false) {
    protocol::AliceState alice = protocol::make_alice(ctx, x, alice_seed);
    protocol::BobState bob = protocol::make_bob(ctx, x, bob_seed);
    RandTape eve_tape(eve_seed);

    SessionOutcome out;
    EveView view;
    view.ctx = &ctx;
    view.tape = &eve_tape;
    view.transcript = &out.transcript;

    std::uint32_t budget = (ctx.fig == protocol::Figure::One) ? 2 : ctx.p.C + 1;
    std::uint32_t canon_len = (ctx.fig == protocol::Figure::One) ? 3 : 2 * (ctx.p.C + 1);
    std::uint32_t canon_idx = 0;
    bool sync = true;

    std::size_t max_steps = std::size_t(2) * budget + 8;
    for (std::size_t step = 0; step < max_steps; ++step) {
        if (alice.terminal != Terminal::None && bob.terminal != Terminal::None) break;
        EveAction act = strat.step(view);
        if (act.kind == EveAction::Kind::Halt) break;

        if (act.kind == EveAction::Kind::CallAlice) {
            if (view.alice_calls >= budget) {
                out.budget_violation = true;
                break;
            }
            if (sync) {
                bool slot_ok = canon_idx < canon_len && canon_idx % 2 == 0;
                bool payload_ok;
                if (view.alice_calls == 0) {
                    payload_ok = !act.payload || act.payload->empty();
                } else {
                    payload_ok = view.last_bob_out && act.payload &&
                                 *act.payload == *view.last_bob_out;
                }
                if (slot_ok && payload_ok) ++canon_idx;
                else sync = false;
            }
            bool was_terminal = alice.terminal != Terminal::None;
            std::optional<std::vector<std::uint8_t>> reply = protocol::alice_step(alice, act.payload);
            ++view.alice_calls;
            view.last_alice_out = reply;
            view.alice_terminal = alice.terminal != Terminal::None;
            out.transcript.push_back({"A" + std::to_string(view.alice_calls), act.payload, reply,
                                      alice.terminal});
            if (!was_terminal && alice.terminal == Terminal::Accept) {
                out.alice_accept_in_sync = sync;
                if (post_application) view.granted_r_a = alice.key;
            }
        } else {
            if (view.bob_calls >= budget) {
                out.budget_violation = true;
                break;
            }
            std::vector<std::uint8_t> payload = act.payload ? *act.payload
                                                            : std::vector<std::uint8_t>{};
            if (sync) {
                bool slot_ok = canon_idx < canon_len && canon_idx % 2 == 1;
                bool payload_ok = view.last_alice_out && payload == *view.last_alice_out;
                if (slot_ok && payload_ok) ++canon_idx;
                else sync = false;
            }
            bool was_terminal = bob.terminal != Terminal::None;
            std::optional<std::vector<std::uint8_t>> reply = protocol::bob_step(bob, payload);
            ++view.bob_calls;
            view.last_bob_out = reply;
            view.bob_terminal = bob.terminal != Terminal::None;
            out.transcript.push_back({"B" + std::to_string(view.bob_calls), payload, reply,
                                      bob.terminal});
            if (!was_terminal && bob.terminal == Terminal::Accept) {
                out.bob_accept_in_sync = sync;
                if (post_application) view.granted_r_b = bob.key;
            }
        }
    }

    out.a_term = alice.terminal;
    out.b_term = bob.terminal;
    out.synchronous = sync;
    if (alice.terminal == Terminal::Accept) out.r_a = alice.key;
    if (bob.terminal == Terminal::Accept) out.r_b = bob.key;
    return out;
}

// ---------------------------------------------------------------------------
// trial batches

struct SourceSpec {
    enum class Kind { Interval, Subset } kind = Kind::Interval;
    std::uint32_t k = 0;
    u64 offset = 0;  // interval start
    u64 seed = 0;    // subset materialization seed
};

inline SourceSpec source_from_json(const nlohmann::json& j) {
    SourceSpec s;
    std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "interval";
    if (kind == "interval") s.kind = SourceSpec::Kind::Interval;
    else if (kind == "subset") s.kind = SourceSpec::Kind::Subset;
    else throw Error("source: unknown kind " + kind);
    if (!j.contains("k")) throw Error("source: missing k");
    s.k = j.at("k").get<std::uint32_t>();
    if (j.contains("offset")) s.offset = j.at("offset").get<u64>();
    if (j.contains("seed")) s.seed = j.at("seed").get<u64>();
    return s;
}

inline std::vector<BitString> materialize_subset(const SourceSpec& spec, std::uint32_t n) {
    if (spec.k > 20) throw Error("source: subset support capped at 2^20");
    std::size_t want = std::size_t(1) << spec.k;
    RandTape tape(mix_seed(spec.seed, 0x5b5e7u));
    std::set<std::string> seen;
    std::vector<BitString> pool;
    pool.reserve(want);
    while (pool.size() < want) {
        BitString x = tape.draw_bits(n);
        if (seen.insert(x.to_hex()).second) pool.push_back(std::move(x));
    }
    return pool;
}

inline BitString sample_source(const SourceSpec& spec, std::uint32_t n, RandTape& tape,
                               const std::vector<BitString>* pool) {
    if (spec.kind == SourceSpec::Kind::Subset) {
        if (!pool || pool->empty()) throw Error("sample_source: subset pool missing");
        return (*pool)[std::size_t(tape.draw_below(pool->size()))];
    }
    if (spec.k > 62 || spec.k >= n) throw Error("sample_source: interval width out of range");
    if (spec.offset > (~u64(0)) - (u64(1) << spec.k))
        throw Error("sample_source: interval overflows");
    u64 value = spec.offset + tape.draw_below(u64(1) << spec.k);
    if (n < 64 && (value >> n) != 0) throw Error("sample_source: interval exceeds n bits");
    return BitString::from_u64(value, n);
}

struct TrialStats {
    u64 trials = 0;
    u64 alice_accept = 0, bob_accept = 0, both_accept = 0;
    u64 key_equal_accepts = 0;
    u64 robustness_violations = 0;  // both accepted, keys differ
    u64 desync_alice_accept = 0;    // Alice accepted after the session desynced
    u64 desync_bob_accept = 0;
    u64 budget_violations = 0;
    u64 synchronous_sessions = 0;
};

struct TrialConfig {
    std::string strategy = "passive";
    nlohmann::json strategy_cfg = nlohmann::json::object();
    SourceSpec source;
    u64 trials = 0;
    u64 seed = 1;
    bool post_application = false;
    std::size_t key_probe_bits = 0;  // collect this many leading key bits per accept
};

struct TrialBatch {
    TrialStats stats;
    std::vector<u64> key_probes;  // from trials where both accepted with equal keys
};

inline TrialBatch run_trials(const ProtocolContext& ctx, const TrialConfig& cfg) {
    if (cfg.trials == 0) throw Error("run_trials: zero trials");
    if (cfg.key_probe_bits > 63 || cfg.key_probe_bits > ctx.p.m_out)
        throw Error("run_trials: key probe wider than the key");
    std::vector<BitString> pool;
    if (cfg.source.kind == SourceSpec::Kind::Subset)
        pool = materialize_subset(cfg.source, ctx.p.n);

    struct TrialRow {
        bool a_acc = false, b_acc = false, a_sync_acc = false, b_sync_acc = false;
        bool keys_equal = false, budget = false, synchronous = false;
        bool probe_valid = false;
        u64 probe = 0;
    };
    std::vector<TrialRow> rows(cfg.trials);
    analysis::parallel_for(cfg.trials, [&](std::size_t t) {
        RandTape src_tape(mix_seed(cfg.seed, u64(t), 1));
        BitString x = sample_source(cfg.source, ctx.p.n, src_tape, &pool);
        std::unique_ptr<Strategy> strat = make_strategy(cfg.strategy, cfg.strategy_cfg, ctx);
        SessionOutcome oc = run_session(ctx, x, *strat, mix_seed(cfg.seed, u64(t), 2),
                                        mix_seed(cfg.seed, u64(t), 3),
                                        mix_seed(cfg.seed, u64(t), 4), cfg.post_application);
        TrialRow& r = rows[t];
        r.a_acc = oc.a_term == Terminal::Accept;
        r.b_acc = oc.b_term == Terminal::Accept;
        r.a_sync_acc = oc.alice_accept_in_sync;
        r.b_sync_acc = oc.bob_accept_in_sync;
        r.budget = oc.budget_violation;
        r.synchronous = oc.synchronous;
        if (r.a_acc && r.b_acc) {
            r.keys_equal = *oc.r_a == *oc.r_b;
            if (r.keys_equal && cfg.key_probe_bits > 0) {
                r.probe = oc.r_a->slice(1, cfg.key_probe_bits).to_u64();
                r.probe_valid = true;
            }
        }
    });

    TrialBatch batch;
    TrialStats& s = batch.stats;
    s.trials = cfg.trials;
    for (const TrialRow& r : rows) {
        if (r.a_acc) ++s.alice_accept;
        if (r.b_acc) ++s.bob_accept;
        if (r.a_acc && r.b_acc) {
            ++s.both_accept;
            if (r.keys_equal) ++s.key_equal_accepts;
            else ++s.robustness_violations;
        }
        if (r.a_acc && !r.a_sync_acc) ++s.desync_alice_accept;
        if (r.b_acc && !r.b_sync_acc) ++s.desync_bob_accept;
        if (r.budget) ++s.budget_violations;
        if (r.synchronous) ++s.synchronous_sessions;
        if (r.probe_valid) batch.key_probes.push_back(r.probe);
    }
    return batch;
}

// ---------------------------------------------------------------------------
// bound verdicts

struct BoundVerdict {
    std::string metric;
    double observed = 0.0, bound = 0.0, sigma = 0.0;
    bool applicable = true;
    bool pass = true;
};

inline BoundVerdict strategy_bound(const ProtocolContext& ctx, const std::string& strategy,
                                   const TrialStats& s) {
    const protocol::ProtocolParams& p = ctx.p;
    double trials = double(s.trials);
    auto finish = [&](BoundVerdict v) {
        v.sigma = std::sqrt(std::max(v.bound * (1.0 - v.bound), 1e-12) / trials);
        v.pass = !v.applicable || v.observed <= v.bound + 3.0 * v.sigma;
        return v;
    };
    if (strategy == "passive") {
        BoundVerdict v;
        v.metric = "honest-completion";
        v.observed = trials > 0 ? double(s.key_equal_accepts) / trials : 0.0;
        v.bound = 1.0;
        v.sigma = 0.0;
        v.pass = s.key_equal_accepts == s.trials && s.robustness_violations == 0 &&
                 s.budget_violations == 0;
        return v;
    }
    if (strategy == "substitute_w") {
        BoundVerdict v;
        v.metric = "substituted-seed-accept";
        v.observed = double(s.desync_alice_accept) / trials;
        v.bound = double(ctx.mac_small.chunks) / std::ldexp(1.0, int(p.v_small));
        return finish(v);
    }
    if (strategy == "flip_seed" || strategy == "tamper_tag") {
        BoundVerdict v;
        v.metric = "tampered-accept";
        v.observed = double(s.desync_alice_accept + s.desync_bob_accept) / trials;
        v.bound = 3.0 * double(p.C) / std::ldexp(1.0, int(p.s));
        return finish(v);
    }
    if (strategy == "desync_skip_alice" || strategy == "replay" || strategy == "final_forge") {
        BoundVerdict v;
        v.metric = "desync-accept";
        v.observed = double(s.desync_bob_accept) / trials;
        v.bound = 3.0 * double(p.C) / std::ldexp(1.0, int(p.s));
        v.applicable = ctx.fig == protocol::Figure::Two;
        return finish(v);
    }
    throw Error("strategy_bound: unknown strategy " + strategy);
}

// ---------------------------------------------------------------------------
// extraction quality probe

struct ExtractionEstimate {
    u64 samples = 0;
    std::size_t bits = 0;
    double delta_emp = 0.0;       // accepted keys vs uniform
    double delta_baseline = 0.0;  // fresh uniform draws of the same size vs uniform
    double scale = 0.0;           // coarse expected fluctuation, sqrt(2^bits / samples)
    bool reliable = false;
};

inline ExtractionEstimate estimate_extraction(const ProtocolContext& ctx, const SourceSpec& src,
                                              u64 trials, u64 seed, std::size_t bit_budget) {
    std::size_t bits = std::min<std::size_t>(bit_budget, std::min<std::size_t>(ctx.p.m_out, 16));
    if (bits == 0) throw Error("estimate_extraction: zero probe width");
    TrialConfig cfg;
    cfg.strategy = "passive";
    cfg.source = src;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.key_probe_bits = bits;
    TrialBatch batch = run_trials(ctx, cfg);

    std::size_t space = std::size_t(1) << bits;
    std::vector<Int> counts(space, Int(0));
    for (u64 v : batch.key_probes) ++counts[std::size_t(v)];
    ExtractionEstimate est;
    est.samples = batch.key_probes.size();
    est.bits = bits;
    if (est.samples == 0) return est;
    analysis::Distribution emp = analysis::Distribution::from_counts(counts);
    analysis::Distribution uni = analysis::Distribution::uniform(space);
    est.delta_emp = to_double(analysis::stat_distance(emp, uni));

    RandTape base_tape(mix_seed(seed, 0xba5eu));
    std::vector<Int> base_counts(space, Int(0));
    for (u64 i = 0; i < est.samples; ++i) ++base_counts[std::size_t(base_tape.draw_below(space))];
    est.delta_baseline =
        to_double(analysis::stat_distance(analysis::Distribution::from_counts(base_counts), uni));
    est.scale = std::sqrt(double(space) / double(est.samples));
    est.reliable = est.samples >= 30 * u64(space);
    return est;
}

// ---------------------------------------------------------------------------
// serialization

inline std::string hex_bytes(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

inline nlohmann::json transcript_to_json(const std::vector<CallRecord>& transcript) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CallRecord& r : transcript) {
        nlohmann::json row;
        row["call"] = r.label;
        row["in"] = r.in ? nlohmann::json(hex_bytes(*r.in)) : nlohmann::json(nullptr);
        row["out"] = r.out ? nlohmann::json(hex_bytes(*r.out)) : nlohmann::json(nullptr);
        row["state"] = r.after == Terminal::Accept   ? "accept"
                       : r.after == Terminal::Reject ? "reject"
                                                     : "running";
        arr.push_back(std::move(row));
    }
    return arr;
}

inline nlohmann::json stats_to_json(const TrialStats& s) {
    nlohmann::json j;
    j["trials"] = s.trials;
    j["alice_accept"] = s.alice_accept;
    j["bob_accept"] = s.bob_accept;
    j["both_accept"] = s.both_accept;
    j["key_equal_accepts"] = s.key_equal_accepts;
    j["robustness_violations"] = s.robustness_violations;
    j["desync_alice_accept"] = s.desync_alice_accept;
    j["desync_bob_accept"] = s.desync_bob_accept;
    j["budget_violations"] = s.budget_violations;
    j["synchronous_sessions"] = s.synchronous_sessions;
    return j;
}

inline nlohmann::json verdict_to_json(const BoundVerdict& v) {
    nlohmann::json j;
    j["metric"] = v.metric;
    j["observed"] = v.observed;
    j["bound"] = v.bound;
    j["sigma"] = v.sigma;
    j["applicable"] = v.applicable;
    j["pass"] = v.pass;
    return j;
}

}  // namespace nmext::harness
