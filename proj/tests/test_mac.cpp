#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "nmext/mac.hpp"

using namespace nmext;
using ff::u64;

TEST_CASE("tag computation over GF(4)") {
    mac::MacParams p = mac::make_mac_params(2, 4);
    // key = (a, b) with a = z, b = 1: bits [a1 a2 b1 b2] = [0 1 1 0]
    BitString key = BitString::from_u64(6, 4);

    // message [1,1]: padded chunks are z+1 and 1, so the tag is
    // b + (z+1) z + z^2 = 1 + 1 + (z+1) = z+1
    BitString tag = mac::mac_tag(key, BitString::from_u64(3, 2), p);
    CHECK(tag.to_hex() == "2:3");

    // empty message: single pad chunk 1, tag = a + b
    BitString tag0 = mac::mac_tag(key, BitString(), p);
    CHECK(tag0.to_hex() == "2:3");  // z + 1 again for this key

    // a = 0 kills every message term
    BitString kzero = BitString::from_u64(0b0100, 4);  // a = 0, b = 1
    CHECK(mac::mac_tag(kzero, BitString::from_u64(3, 2), p).to_u64() == 1);

    CHECK(mac::mac_verify(key, BitString::from_u64(3, 2), tag, p));
    CHECK_FALSE(mac::mac_verify(key, BitString::from_u64(2, 2), tag, p));
    CHECK_THROWS_AS(mac::mac_tag(BitString::from_u64(1, 3), BitString(), p), Error);
    CHECK_THROWS_AS(mac::mac_tag(key, BitString::from_u64(0, 5), p), Error);
    CHECK_THROWS_AS(mac::mac_verify(key, BitString(), BitString::from_u64(0, 3), p), Error);
}

TEST_CASE("padding layout") {
    mac::MacParams p = mac::make_mac_params(4, 8);
    CHECK(p.chunks == 2);

    // 5-bit message 10110 pads to [0110 1][1 00] -> two chunks
    auto chunks = mac::mac_chunks(BitString::from_u64(0b01101, 5), p);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].to_u64() == 0b1101);
    CHECK(chunks[1].to_u64() == 0b0010);  // message bit 5 = 0, pad bit at position 6

    // full-length message pushes the pad bit into an extra chunk
    auto full = mac::mac_chunks(BitString::from_u64(0xab, 8), p);
    REQUIRE(full.size() == 3);
    CHECK(full[0].to_u64() == 0xb);
    CHECK(full[1].to_u64() == 0xa);
    CHECK(full[2].to_u64() == 1);

    auto empty = mac::mac_chunks(BitString(), p);
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].to_u64() == 1);

    // distinct messages of any lengths give distinct padded sequences
    mac::MacParams p2 = mac::make_mac_params(2, 4);
    std::vector<std::vector<BitString>> seen;
    int total = 0;
    for (std::size_t len = 0; len <= 4; ++len)
        for (u64 v = 0; v < (u64(1) << len); ++v) {
            auto c = mac::mac_chunks(BitString::from_u64(v, len), p2);
            for (const auto& s : seen) CHECK(s != c);
            seen.push_back(c);
            ++total;
        }
    CHECK(total == 31);
}

TEST_CASE("tag collisions per message pair stay under the chunk count") {
    // the tag difference is a polynomial in a of degree <= chunks with no
    // constant term, so at most chunks roots, each worth 2^v keys
    mac::MacParams p = mac::make_mac_params(3, 6);
    const std::size_t nmsg = 64, nkey = 64;
    std::vector<std::vector<u64>> tags(nmsg, std::vector<u64>(nkey));
    for (std::size_t m = 0; m < nmsg; ++m)
        for (std::size_t k = 0; k < nkey; ++k)
            tags[m][k] =
                mac::mac_tag(BitString::from_u64(k, 6), BitString::from_u64(m, 6), p).to_u64();
    for (std::size_t m1 = 0; m1 < nmsg; ++m1)
        for (std::size_t m2 = m1 + 1; m2 < nmsg; ++m2) {
            int coll = 0;
            for (std::size_t k = 0; k < nkey; ++k)
                if (tags[m1][k] == tags[m2][k]) ++coll;
            CHECK(coll <= int(p.chunks) * 8);
        }
}

TEST_CASE("exact forgery optimum saturates the fixed-length bound") {
    CHECK(mac::mac_max_forgery(mac::make_mac_params(2, 2)) == Rat(1, 4));
    CHECK(mac::mac_max_forgery(mac::make_mac_params(3, 6)) == Rat(1, 4));
    CHECK(mac::mac_max_forgery(mac::make_mac_params(2, 0)) == Rat(0));
    CHECK_THROWS_AS(mac::mac_max_forgery(mac::make_mac_params(9, 4)), Error);  // oracle cap
}

TEST_CASE("mixed-length pairs can pick up one extra chunk root") {
    // v = 4, d = 8: fixed-length pairs collide on at most 2 * 16 keys, but an
    // 8-bit vs 7-bit pair can reach 3 * 16 because the pad chunk no longer
    // cancels; the observed maximum hits that ceiling exactly
    mac::MacParams p = mac::make_mac_params(4, 8);
    const std::size_t nkey = 256;
    std::vector<std::vector<u64>> t8(256, std::vector<u64>(nkey)), t7(128, std::vector<u64>(nkey));
    for (std::size_t m = 0; m < 256; ++m)
        for (std::size_t k = 0; k < nkey; ++k)
            t8[m][k] =
                mac::mac_tag(BitString::from_u64(k, 8), BitString::from_u64(m, 8), p).to_u64();
    for (std::size_t m = 0; m < 128; ++m)
        for (std::size_t k = 0; k < nkey; ++k)
            t7[m][k] =
                mac::mac_tag(BitString::from_u64(k, 8), BitString::from_u64(m, 7), p).to_u64();
    int worst = 0;
    for (std::size_t m1 = 0; m1 < 256; ++m1)
        for (std::size_t m2 = 0; m2 < 128; ++m2) {
            int coll = 0;
            for (std::size_t k = 0; k < nkey; ++k)
                if (t8[m1][k] == t7[m2][k]) ++coll;
            worst = std::max(worst, coll);
        }
    CHECK(worst == 3 * 16);
}

TEST_CASE("leaky forgery game") {
    mac::MacParams p = mac::make_mac_params(3, 6);
    const std::size_t nkey = 64;

    std::vector<std::uint32_t> nothing(nkey, 0);
    CHECK(mac::mac_max_forgery_leaky(p, nothing) == mac::mac_max_forgery(p));

    std::vector<std::uint32_t> lowbit(nkey);
    for (std::size_t k = 0; k < nkey; ++k) lowbit[k] = std::uint32_t(k & 1);
    CHECK(mac::mac_max_forgery_leaky(p, lowbit) == Rat(1, 2));

    std::vector<std::uint32_t> everything(nkey);
    std::iota(everything.begin(), everything.end(), 0u);
    CHECK(mac::mac_max_forgery_leaky(p, everything) == Rat(1));

    std::vector<std::uint32_t> wrong(nkey - 1, 0);
    CHECK_THROWS_AS(mac::mac_max_forgery_leaky(p, wrong), Error);
}
