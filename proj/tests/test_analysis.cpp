#include <catch2/catch_amalgamated.hpp>

#include "nmext/analysis.hpp"
#include "nmext/sweeps.hpp"

using namespace nmext;
using analysis::Distribution;
using analysis::JointTable;
using ff::u64;
using json = nlohmann::json;

namespace {

std::vector<u64> field_elems(u64 q) {
    std::vector<u64> v;
    for (u64 x = 0; x < q; ++x) v.push_back(x);
    return v;
}

}  // namespace

TEST_CASE("character sum over F_3") {
    // chi(1) = 1, chi(2) = -1: each inner sum over the full field is -1, so
    // three seeds give exactly 3
    analysis::CharField cf = analysis::make_char_field(3);
    analysis::CharSpec spec{3, 1, 1};
    auto S = field_elems(3);
    double theta = analysis::charsum_theta(cf, spec, S, S, [](u64 y) { return (y + 1) % 3; });
    CHECK(theta == Catch::Approx(3.0).margin(1e-9));
    CHECK(theta <= analysis::uniform_theta_bound(3, 3));
}

TEST_CASE("table and Euler characters agree at the quadratic exponent") {
    const u64 q = 13;
    analysis::CharField cf = analysis::make_char_field(q);
    analysis::CharSpec spec{q, (q - 1) / 2, (q - 1) / 2};
    auto S = field_elems(q);
    std::vector<u64> T{0, 1, 5, 11};
    auto A = [q](u64 y) { return (y + 2) % q; };
    double via_table = analysis::charsum_theta(cf, spec, S, T, A);
    double via_euler = analysis::charsum_theta_quad(q, S, T, A);
    CHECK(via_table == Catch::Approx(via_euler).margin(1e-6));
}

TEST_CASE("character sum input validation") {
    analysis::CharField cf = analysis::make_char_field(5);
    auto S = field_elems(5);
    auto id = [](u64 y) { return y; };
    auto shift = [](u64 y) { return (y + 1) % 5; };
    CHECK_THROWS_AS(analysis::charsum_theta(cf, {5, 1, 0}, S, S, id), Error);  // fixed points
    CHECK_THROWS_AS(analysis::charsum_theta(cf, {5, 0, 0}, S, S, shift), Error);  // trivial chi
    CHECK_THROWS_AS(analysis::charsum_theta(cf, {5, 4, 0}, S, S, shift), Error);  // a = q-1
    CHECK_THROWS_AS(analysis::charsum_theta(cf, {7, 1, 0}, S, S, shift), Error);  // q mismatch
    CHECK_THROWS_AS(analysis::make_char_field(8), Error);
}

TEST_CASE("moment bounds scaffolding") {
    // lambda_r and the weak-seed ceiling are plain formulas; pin a few values
    CHECK(analysis::lambda_r(1, 5, 5) ==
          Catch::Approx(std::pow(9.0 + 16.0, 0.25)).margin(1e-12));
    CHECK(analysis::weak_theta_bound(1, 5, 5, 5) ==
          Catch::Approx(std::pow(25.0, 0.25) * std::pow(5.0, 0.25) * std::sqrt(5.0) * 5.0)
              .margin(1e-9));
    CHECK(analysis::default_moment_order(4099, 64) == 5);
    CHECK(analysis::default_moment_order(17, 1) == 1);
    CHECK(analysis::eta_theta_bound(5, 4) == Catch::Approx(2.0 * std::pow(5.0, 1.25) * 2.0));
}

TEST_CASE("complete-sum spot checks") {
    analysis::CharField cf5 = analysis::make_char_field(5);
    // x^2 (x-1)^2 under the full-order character: the sum has magnitude 1
    analysis::WeilResult r = analysis::weil_check(cf5, {0, 1}, {2, 2});
    CHECK(r.sum_abs == Catch::Approx(1.0).margin(1e-9));
    CHECK(r.bound == Catch::Approx(std::sqrt(5.0)));
    CHECK(r.pass);

    // a linear polynomial sums the full character over F_q^*: exactly zero
    analysis::WeilResult lin = analysis::weil_check(cf5, {3}, {1});
    CHECK(lin.sum_abs == Catch::Approx(0.0).margin(1e-9));
    CHECK(lin.bound == 0.0);
    CHECK(lin.pass);

    CHECK_THROWS_AS(analysis::weil_check(cf5, {0, 0}, {1, 1}), Error);  // repeated root
    CHECK_THROWS_AS(analysis::weil_check(cf5, {0}, {4}), Error);        // full power
    CHECK_THROWS_AS(analysis::weil_check(cf5, {0}, {0}), Error);
    CHECK_THROWS_AS(analysis::weil_check(cf5, {7}, {1}), Error);
}

TEST_CASE("exact extractor distance") {
    // q = 5, bit variant, S = {1,2,4}, T = {0}, A = y+1: the tally gives 1/6
    auto A = [](u64 y) { return (y + 1) % 5; };
    analysis::NmDistance d =
        analysis::nm_distance(5, 2, {1, 2, 4}, {0}, A, analysis::NmVariant::Bit);
    CHECK(d.delta == Rat(1, 6));
    REQUIRE(d.per_seed.size() == 1);
    CHECK(d.per_seed[0] == Rat(1, 6));

    // the mean over seeds equals delta
    analysis::NmDistance d2 =
        analysis::nm_distance(5, 2, {1, 2, 4}, {0, 2}, A, analysis::NmVariant::Bit);
    CHECK(d2.delta == (d2.per_seed[0] + d2.per_seed[1]) / 2);

    // dlog variant with M = 2 coincides with the bit variant everywhere
    analysis::NmDistance bit =
        analysis::nm_distance(17, 2, {1, 3, 5, 7}, {0, 1}, A, analysis::NmVariant::Bit);
    analysis::NmDistance dl =
        analysis::nm_distance(17, 2, {1, 3, 5, 7}, {0, 1}, A, analysis::NmVariant::Dlog);
    CHECK(bit.delta == dl.delta);

    // general-M at M = 4 against the dlog variant (4 divides 16)
    analysis::NmDistance g4 =
        analysis::nm_distance(17, 4, {1, 3, 5, 7}, {0, 1}, A, analysis::NmVariant::GeneralM);
    analysis::NmDistance d4 =
        analysis::nm_distance(17, 4, {1, 3, 5, 7}, {0, 1}, A, analysis::NmVariant::Dlog);
    CHECK(g4.delta == d4.delta);

    CHECK_THROWS_AS(analysis::nm_distance(5, 2, {}, {0}, A, analysis::NmVariant::Bit), Error);
    CHECK_THROWS_AS(analysis::nm_distance(5, 3, {1}, {0}, A, analysis::NmVariant::Bit), Error);
    auto fixed = [](u64 y) { return y; };
    CHECK_THROWS_AS(analysis::nm_distance(5, 2, {1}, {0}, fixed, analysis::NmVariant::Bit),
                    Error);

    CHECK(analysis::nm_distance_bound(4099, 2, 2048) ==
          Catch::Approx(2.0 * std::pow(4099.0, 0.25) * std::pow(2.0, 1.0 - 5.5) + 1.0 / 4099.0));
    CHECK(analysis::nm_distance_bound(5, 1024, 2) == 1.0);  // clipped
}

TEST_CASE("leftover hash distance") {
    // n = 3, m = 1, S = the whole cube: only the zero seed misses, giving
    // exactly 1/16
    ff::Gf2Ctx f3 = ff::make_gf2_ctx(3);
    std::vector<BitString> S;
    for (u64 v = 0; v < 8; ++v) S.push_back(BitString::from_u64(v, 3));
    analysis::LhlResult r = analysis::lhl_check(f3, 1, S);
    CHECK(r.delta == Rat(1, 16));
    CHECK(r.bound == Catch::Approx(0.5 * std::pow(2.0, -1.0)));
    CHECK(r.pass);

    // a single-point source gives a point mass at every seed
    analysis::LhlResult one = analysis::lhl_check(f3, 1, {BitString::from_u64(5, 3)});
    CHECK(one.delta == Rat(1, 2));
    CHECK(one.bound == Catch::Approx(std::sqrt(2.0) / 2.0));
    CHECK(one.pass);

    CHECK_THROWS_AS(analysis::lhl_check(f3, 0, S), Error);
    CHECK_THROWS_AS(analysis::lhl_check(f3, 4, S), Error);
    CHECK_THROWS_AS(analysis::lhl_check(f3, 1, {}), Error);
    CHECK_THROWS_AS(analysis::lhl_check(f3, 1, {BitString::from_u64(0, 4)}), Error);
}

TEST_CASE("numeric XOR lemma") {
    // perfectly correlated uniform bits: alpha = 1, distance = 1/2
    JointTable jt(2, 2);
    jt.at(0, 0) = Rat(1, 2);
    jt.at(1, 1) = Rat(1, 2);
    analysis::XorCheck res = analysis::xor_lemma_check(jt);
    CHECK(res.alpha == Catch::Approx(1.0).margin(1e-9));
    CHECK(res.delta == Rat(1, 2));
    CHECK(res.linf == Rat(1, 4));
    CHECK(res.pass_delta);
    CHECK(res.pass_linf);

    // independent uniform: alpha = 0 and the distance vanishes
    JointTable ind(2, 2);
    for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t v = 0; v < 2; ++v) ind.at(u, v) = Rat(1, 4);
    analysis::XorCheck res2 = analysis::xor_lemma_check(ind);
    CHECK(res2.alpha == Catch::Approx(0.0).margin(1e-9));
    CHECK(res2.delta == Rat(0));
    CHECK(res2.pass_delta);
    CHECK(res2.pass_linf);

    JointTable rect(2, 3);
    CHECK_THROWS_AS(analysis::xor_lemma_check(rect), Error);
    CHECK_THROWS_AS(analysis::fourier_alpha(rect), Error);
}

TEST_CASE("residue map distance") {
    CHECK(analysis::residue_map_distance(5, 2) == Rat(1, 10));
    CHECK(analysis::residue_map_distance(4, 2) == Rat(0));
    CHECK(analysis::residue_map_distance(7, 7) == Rat(0));
    CHECK(analysis::residue_map_distance(10, 3) == Rat(1, 15));
    CHECK_THROWS_AS(analysis::residue_map_distance(3, 4), Error);
    CHECK_THROWS_AS(analysis::residue_map_distance(0, 1), Error);
}

TEST_CASE("l1 Fourier norms of the parity map") {
    // f(x) = (-1)^(x mod 2) over Z_6 concentrates all mass at k = 3
    analysis::L1NormResult r = analysis::l1_fourier_norm_check(6, 2, 1.0);
    REQUIRE(r.norms.size() == 2);
    CHECK(r.norms[0] == Catch::Approx(6.0).margin(1e-6));  // trivial character
    CHECK(r.norms[1] == Catch::Approx(6.0).margin(1e-6));
    CHECK(r.bound == Catch::Approx(6.0 * std::log(6.0)));
    CHECK(r.pass);
    CHECK_THROWS_AS(analysis::l1_fourier_norm_check(4, 5, 1.0), Error);
}

TEST_CASE("sweeps pass and replay identically") {
    json a = sweeps::charsum_sweep(13, 7);
    CHECK(a["summary"]["all_pass"].get<bool>());
    json b = sweeps::charsum_sweep(13, 7);
    CHECK(a.dump() == b.dump());

    json w = sweeps::weil_sweep({5, 7});
    CHECK(w["summary"]["all_pass"].get<bool>());

    json n = sweeps::nm_sweep({17}, 11);
    CHECK(n["summary"]["all_pass"].get<bool>());
    CHECK(n.dump() == sweeps::nm_sweep({17}, 11).dump());

    json x = sweeps::xor_sweep(3, 10, 3);
    CHECK(x["summary"]["all_pass"].get<bool>());

    json rm = sweeps::residue_sweep(16);
    CHECK(rm["summary"]["all_pass"].get<bool>());

    json l1 = sweeps::l1norm_sweep(16, 8.0);
    CHECK(l1["summary"]["all_pass"].get<bool>());

    json wk = sweeps::charsum_weak_sweep(13, {1, 2}, 5);
    CHECK(wk["summary"]["all_pass"].get<bool>());
}
