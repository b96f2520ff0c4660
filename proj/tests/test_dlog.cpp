#include <catch2/catch_amalgamated.hpp>

#include "nmext/dlog.hpp"
#include "nmext/ff.hpp"

using namespace nmext;
using ff::u64;

TEST_CASE("quadratic character basics") {
    CHECK(dlog::quad_char(0, 13) == 0);
    CHECK(dlog::quad_char(13, 13) == 0);
    CHECK(dlog::quad_char(1, 13) == 1);
    CHECK(dlog::quad_char(4, 13) == 1);
    CHECK(dlog::quad_char(2, 13) == -1);
    CHECK_THROWS_AS(dlog::quad_char(1, 4), Error);
    CHECK_THROWS_AS(dlog::quad_char(1, 2), Error);

    for (u64 q : {5ull, 13ull, 17ull, 101ull}) {
        // squares land on +1
        for (u64 z = 1; z < q; ++z) CHECK(dlog::quad_char(ff::mulmod(z, z, q), q) == 1);
        // multiplicative: chi(ab) = chi(a) chi(b)
        for (u64 a = 1; a < q; ++a)
            for (u64 b = 1; b < q; ++b)
                CHECK(dlog::quad_char(ff::mulmod(a, b, q), q) ==
                      dlog::quad_char(a, q) * dlog::quad_char(b, q));
        // balanced: as many squares as non-squares
        int sum = 0;
        for (u64 z = 1; z < q; ++z) sum += dlog::quad_char(z, q);
        CHECK(sum == 0);
    }
}

TEST_CASE("brute-force log oracle") {
    // powers of 3 mod 17: 1 3 9 10 13 5 15 11 16 ...
    CHECK(dlog::dlog_brute(5, 17, 3) == 5);
    CHECK(dlog::dlog_brute(16, 17, 3) == 8);
    CHECK(dlog::dlog_brute(13, 17, 3) == 4);
    CHECK(dlog::dlog_brute(1, 17, 3) == 0);
    CHECK_THROWS_AS(dlog::dlog_brute(0, 17, 3), Error);
    CHECK_THROWS_AS(dlog::dlog_brute(1, (u64(1) << 20) + 7, 3), Error);  // over the cap

    std::vector<u64> table = dlog::dlog_table(17, 3);
    for (u64 z = 1; z < 17; ++z) CHECK(table[z] == dlog::dlog_brute(z, 17, 3));
}

TEST_CASE("subgroup log agrees with the full log mod 2^m") {
    // q-1 = 16, 96 = 2^5*3, 256: varying mixes of 2-power part and cofactor
    for (u64 q : {17ull, 97ull, 257ull}) {
        u64 r = q - 1;
        std::uint32_t mmax = 0;
        while (r % 2 == 0) {
            r /= 2;
            ++mmax;
        }
        ff::FieldCtx full = ff::make_field_ctx(q, mmax);
        std::vector<u64> table = dlog::dlog_table(q, full.g);
        for (std::uint32_t m = 1; m <= mmax; ++m) {
            ff::FieldCtx ctx = ff::make_field_ctx(q, m);
            for (u64 z = 1; z < q; ++z)
                CHECK(dlog::dlog_pow2(z, ctx) == table[z] % (u64(1) << m));
        }
    }
}

TEST_CASE("subgroup log input validation") {
    ff::FieldCtx ctx = ff::make_field_ctx(17, 4);
    CHECK_THROWS_AS(dlog::dlog_pow2(0, ctx), Error);
    CHECK_THROWS_AS(dlog::dlog_pow2(17, ctx), Error);  // 17 = 0 mod 17
    ff::FieldCtx m0 = ff::make_field_ctx(17, 0);
    CHECK_THROWS_AS(dlog::dlog_pow2(3, m0), Error);

    // the low bit of the log is exactly the non-square indicator
    for (u64 z = 1; z < 17; ++z) {
        ff::FieldCtx c1 = ff::make_field_ctx(17, 1);
        u64 bit = dlog::dlog_pow2(z, c1);
        CHECK(bit == (dlog::quad_char(z, 17) == -1 ? 1u : 0u));
    }
}
