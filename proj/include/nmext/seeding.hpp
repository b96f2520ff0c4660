#pragma once

// Deterministic randomness plumbing.  Every sampled object in tests, sweeps
// and protocol sessions is derived from explicit 64-bit seeds through
// splitmix64 mixing and mt19937_64, so identical configs replay bit-for-bit.

#include <cstdint>
#include <random>

#include "nmext/bitstring.hpp"

namespace nmext {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ull));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// A party's local randomness as an explicit replayable tape.
class RandTape {
public:
    explicit RandTape(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t draw_u64() { return gen_(); }

    BitString draw_bits(std::size_t len) {
        BitString out(len);
        std::size_t pos = 1;
        while (pos <= len) {
            std::uint64_t w = gen_();
            for (int i = 0; i < 64 && pos <= len; ++i, ++pos)
                if ((w >> i) & 1) out.set_bit(pos, true);
        }
        return out;
    }

    // Uniform value in [0, bound) by rejection from the top 64-bit range.
    std::uint64_t draw_below(std::uint64_t bound) {
        if (bound == 0) throw Error("draw_below: zero bound");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        while (true) {
            std::uint64_t v = gen_();
            if (v < limit) return v % bound;
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace nmext
