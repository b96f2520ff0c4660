#include <catch2/catch_amalgamated.hpp>

#include "nmext/distribution.hpp"
#include "nmext/seeding.hpp"

using namespace nmext;
using analysis::Distribution;
using analysis::JointTable;

TEST_CASE("rational helpers") {
    CHECK(rat_pow2(3) == Rat(8));
    CHECK(rat_pow2(0) == Rat(1));
    CHECK(rat_pow2(-2) == Rat(1, 4));
    CHECK(neg_log2(Rat(1, 8)) == 3.0);
    CHECK(neg_log2(Rat(1)) == 0.0);
    CHECK(neg_log2(Rat(3, 4)) == Catch::Approx(0.4150374992788438));
    CHECK_THROWS_AS(neg_log2(Rat(0)), Error);
    CHECK(to_double(Rat(1, 2)) == 0.5);
}

TEST_CASE("distributions") {
    Distribution u = Distribution::uniform(4);
    u.validate();
    CHECK(u.max_mass() == Rat(1, 4));
    CHECK(analysis::min_entropy(u) == 2.0);

    Distribution d = Distribution::from_counts({Int(1), Int(3)});
    d.validate();
    CHECK(d.p[0] == Rat(1, 4));
    CHECK(d.p[1] == Rat(3, 4));
    CHECK(analysis::stat_distance(Distribution::uniform(2), d) == Rat(1, 4));
    CHECK(analysis::stat_distance(d, d) == Rat(0));

    CHECK(analysis::min_entropy(Distribution::from_counts({Int(1), Int(1), Int(2)})) == 1.0);

    CHECK_THROWS_AS(Distribution::uniform(0), Error);
    CHECK_THROWS_AS(Distribution::from_counts({Int(0), Int(0)}), Error);
    CHECK_THROWS_AS(Distribution::from_counts({Int(-1), Int(2)}), Error);
    CHECK_THROWS_AS(analysis::stat_distance(u, d), Error);

    Distribution bad;
    bad.p = {Rat(1, 2), Rat(1, 3)};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("joint tables and conditioning") {
    // X fully determined by W: conditional entropy collapses to zero
    JointTable det(2, 2);
    det.at(0, 0) = Rat(1, 2);
    det.at(1, 1) = Rat(1, 2);
    det.validate();
    CHECK(analysis::avg_cond_max_mass(det) == Rat(1));
    CHECK(analysis::avg_cond_min_entropy(det) == 0.0);

    // independent uniform pair keeps the full bit
    JointTable ind(2, 2);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) ind.at(r, c) = Rat(1, 4);
    CHECK(analysis::avg_cond_max_mass(ind) == Rat(1, 2));
    CHECK(analysis::avg_cond_min_entropy(ind) == 1.0);

    Distribution rm = ind.row_marginal();
    Distribution cm = ind.col_marginal();
    CHECK(rm.p == std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
    CHECK(cm.p == std::vector<Rat>{Rat(1, 2), Rat(1, 2)});

    JointTable bad(2, 2);
    bad.at(0, 0) = Rat(1, 2);
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("spread and conditioning-loss inequalities hold on random joints") {
    // both checks encode Markov-style inequalities that hold for every table,
    // so seeded random integer-weight joints must never falsify them
    RandTape tape(0x40ff2ull);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t rows = 1 + tape.draw_below(6);
        std::size_t cols = 1 + tape.draw_below(6);
        JointTable j(rows, cols);
        Int total = 0;
        std::vector<Int> w(rows * cols);
        for (auto& x : w) {
            x = Int(tape.draw_below(100));
            total += x;
        }
        if (total == 0) continue;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) j.at(r, c) = Rat(w[r * cols + c], total);
        j.validate();
        for (unsigned s : {0u, 1u, 2u, 5u}) CHECK(analysis::entropy_spread_check(j, s));
        CHECK(analysis::conditioning_loss_check(j));

        Distribution rm = j.row_marginal();
        Distribution cm = j.col_marginal();
        Rat rsum = 0, csum = 0;
        for (const Rat& x : rm.p) rsum += x;
        for (const Rat& x : cm.p) csum += x;
        CHECK(rsum == Rat(1));
        CHECK(csum == Rat(1));
    }
}
