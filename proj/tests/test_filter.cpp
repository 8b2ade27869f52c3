#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "efid/filter.hpp"
#include "oracles.hpp"

using namespace efid;

TEST_CASE("params validation") {
    CHECK_THROWS_AS(FilterParams(0, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(FilterParams(12, 1, 0.5), std::invalid_argument);   // not whole bytes
    CHECK_THROWS_AS(FilterParams(256, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(FilterParams(256, 257, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(FilterParams(256, 5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(FilterParams(256, 5, 1.5), std::invalid_argument);
    CHECK_NOTHROW(FilterParams(8, 8, 1.0));
}

TEST_CASE("k equal to m forces every position") {
    const FilterParams params(8, 8, 1.0);
    Rng rng = Rng::from_seed(123);
    const LinkId lid = new_link_id(params, rng);
    CHECK(lid.bits().to_hex() == "ff");
}

TEST_CASE("link id generation is deterministic and exactly k bits") {
    const FilterParams params(256, 5, 0.5);
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xdeadbeefull}) {
        Rng a = Rng::from_seed(seed);
        Rng b = Rng::from_seed(seed);
        const LinkId la = new_link_id(params, a);
        const LinkId lb = new_link_id(params, b);
        CHECK(la == lb);
        CHECK(la.bits().popcount() == 5);
    }
}

TEST_CASE("positions are uniform: per-bit frequency over 1e5 draws") {
    const FilterParams params(320, 5, 0.5);
    const std::uint64_t draws = 100000;
    std::vector<std::uint32_t> counts(params.m, 0);
    Rng rng = Rng::stream(2, "lid-frequency");
    for (std::uint64_t d = 0; d < draws; ++d) {
        const LinkId lid = new_link_id(params, rng);
        for (std::uint32_t i = 0; i < params.m; ++i)
            if (lid.bits().get(i))
                ++counts[i];
    }
    const double p = 5.0 / 320.0;
    const double sigma = oracle::binom_count_sigma(p, static_cast<double>(draws));
    const double expected = p * static_cast<double>(draws);
    double worst = 0;
    for (auto c : counts)
        worst = std::max(worst, std::abs(static_cast<double>(c) - expected));
    CHECK(worst <= 3.0 * sigma);
}

TEST_CASE("build_fid is the OR of its inputs") {
    const FilterParams params(256, 5, 1.0);
    Rng rng = Rng::from_seed(9);
    const LinkId lid1 = new_link_id(params, rng);
    const LinkId lid2 = new_link_id(params, rng);

    SUBCASE("single input: identity") {
        const auto fid = build_fid(std::vector{lid1}, params);
        CHECK(fid.bits() == lid1.bits());
    }
    SUBCASE("repeated input: idempotent") {
        const auto once = build_fid(std::vector{lid1}, params);
        const auto twice = build_fid(std::vector{lid1, lid1}, params);
        CHECK(once == twice);
    }
    SUBCASE("order independent") {
        const auto ab = build_fid(std::vector{lid1, lid2}, params);
        const auto ba = build_fid(std::vector{lid2, lid1}, params);
        CHECK(ab == ba);
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(build_fid({}, params), std::invalid_argument);
    }
}

TEST_CASE("build_fid permutation invariance over random sets") {
    const FilterParams params(320, 5, 1.0);
    Rng rng = Rng::from_seed(77);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<LinkId> lids;
        for (int i = 0; i < 10; ++i)
            lids.push_back(new_link_id(params, rng));
        const auto reference = build_fid(lids, params);
        for (int shuffle = 0; shuffle < 5; ++shuffle) {
            for (std::size_t i = lids.size(); i > 1; --i)
                std::swap(lids[i - 1], lids[rng.below(i)]);
            CHECK(build_fid(lids, params) == reference);
        }
    }
}

TEST_CASE("fill factor bounds: k/m <= rho <= min(1, sum k/m)") {
    const FilterParams params(256, 5, 1.0);
    Rng rng = Rng::from_seed(31);
    for (std::uint32_t n : {1u, 2u, 5u, 23u, 80u}) {
        std::vector<LinkId> lids;
        for (std::uint32_t i = 0; i < n; ++i)
            lids.push_back(new_link_id(params, rng));
        const double rho = fill_factor(build_fid(lids, params));
        CHECK(rho >= 5.0 / 256.0);
        CHECK(rho <= std::min(1.0, n * 5.0 / 256.0) + 1e-12);
    }
}

TEST_CASE("fill cap enforcement fails hard") {
    const FilterParams params(256, 5, 0.03);   // two LinkIds exceed 0.03
    Rng rng = Rng::from_seed(5);
    std::vector<LinkId> lids{new_link_id(params, rng), new_link_id(params, rng)};
    try {
        build_fid(lids, params);
        FAIL("expected FillFactorExceeded");
    } catch (const FillFactorExceeded& e) {
        CHECK(e.limit == doctest::Approx(0.03));
        CHECK(e.actual > e.limit);
    }
}

TEST_CASE("mean fill of 23 LinkIds matches the closed form") {
    const FilterParams params(320, 5, 1.0);
    double total = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(11, "fill-mc", static_cast<std::uint64_t>(s));
        std::vector<LinkId> lids;
        for (int i = 0; i < 23; ++i)
            lids.push_back(new_link_id(params, rng));
        total += fill_factor(build_fid(lids, params));
    }
    const double mean = total / seeds;
    CHECK(std::abs(mean - expected_fill(320, 5, 23)) <= 0.05);
    CHECK(expected_fill(320, 5, 23) == doctest::Approx(0.3022802).epsilon(1e-6));
}

TEST_CASE("no false negatives, exhaustive for m=16 k=2") {
    const FilterParams params(16, 2, 1.0);
    std::vector<LinkId> all;
    for (std::uint32_t i = 0; i < 16; ++i) {
        for (std::uint32_t j = i + 1; j < 16; ++j) {
            BitVec bits(16);
            bits.set(i);
            bits.set(j);
            all.emplace_back(std::move(bits), params);
        }
    }
    for (std::size_t a = 0; a < all.size(); ++a) {
        for (std::size_t b = a; b < all.size(); ++b) {
            const auto fid = build_fid(std::vector{all[a], all[b]}, params);
            CHECK(membership_check(fid, all[a]));
            CHECK(membership_check(fid, all[b]));
        }
    }
}

TEST_CASE("no false negatives, randomized for m=256 and m=320") {
    for (std::uint32_t m : {256u, 320u}) {
        const FilterParams params(m, 5, 0.6);
        for (int rep = 0; rep < 200; ++rep) {
            Rng rng = Rng::stream(13, "nfn", static_cast<std::uint64_t>(m) * 1000 + rep);
            std::vector<LinkId> lids;
            for (int i = 0; i < 20; ++i)
                lids.push_back(new_link_id(params, rng));
            const auto fid = build_fid(lids, params);
            for (const auto& lid : lids)
                CHECK(membership_check(fid, lid));
        }
    }
}

TEST_CASE("membership against an empty filter is always false") {
    const FilterParams params(256, 5, 1.0);
    Rng rng = Rng::from_seed(17);
    const ForwardingId zero{BitVec(256)};
    for (int i = 0; i < 50; ++i)
        CHECK_FALSE(membership_check(zero, new_link_id(params, rng)));
}

TEST_CASE("false-positive rate of a fresh LinkId converges to rho^k") {
    const FilterParams params(320, 5, 1.0);
    const double rho = 0.5;
    const std::uint64_t trials = 100000;
    Rng rng = Rng::stream(21, "fp-rate");
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ForwardingId fid{BitVec::random(320, rng, rho)};
        if (membership_check(fid, new_link_id(params, rng)))
            ++hits;
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(trials);
    CHECK(oracle::within_sigma(rate, std::pow(rho, 5), static_cast<double>(trials), 3.0));
}

TEST_CASE("fill_factor fixed points") {
    CHECK(fill_factor(ForwardingId{BitVec(256)}) == 0.0);
    CHECK(fill_factor(ForwardingId{BitVec::all_ones(256)}) == 1.0);
    BitVec half(256);
    for (std::uint32_t i = 0; i < 128; ++i)
        half.set(2 * i);
    CHECK(fill_factor(ForwardingId{std::move(half)}) == 0.5);
}

TEST_CASE("per-hop false-positive closed form") {
    CHECK(false_positive_prob(0.5, 5, 1) == 0.03125);
    for (double rho : {0.25, 0.4, 0.75}) {
        const double one = false_positive_prob(rho, 5, 1);
        CHECK(false_positive_prob(rho, 5, 2) == doctest::Approx(one * one).epsilon(1e-12));
    }
    // high-exponent case against exact decimal arithmetic:
    // 0.3^20 = 3^20 / 10^20 with 3^20 = 3486784401
    CHECK(false_positive_prob(0.30, 5, 4) == doctest::Approx(3.486784401e-11).epsilon(1e-9));

    SUBCASE("strictly decreasing in l below saturation") {
        double prev = 1.0;
        for (std::uint32_t l = 1; l <= 10; ++l) {
            const double p = false_positive_prob(0.7, 5, l);
            CHECK(p < prev);
            prev = p;
        }
    }
    SUBCASE("saturated filter never filters") {
        for (std::uint32_t l = 1; l <= 4; ++l)
            CHECK(false_positive_prob(1.0, 5, l) == 1.0);
    }
    SUBCASE("domain validation") {
        CHECK_THROWS_AS(false_positive_prob(0.0, 5, 1), std::invalid_argument);
        CHECK_THROWS_AS(false_positive_prob(1.1, 5, 1), std::invalid_argument);
        CHECK_THROWS_AS(false_positive_prob(0.5, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(false_positive_prob(0.5, 5, 0), std::invalid_argument);
    }
}

TEST_CASE("hex serialization: bit i is bit (i mod 8) of byte i/8") {
    BitVec v(16);
    v.set(0);
    v.set(9);
    CHECK(v.to_hex() == "0102");
    CHECK(BitVec::from_hex("0102", 16) == v);

    SUBCASE("round trip over random filters") {
        Rng rng = Rng::from_seed(3);
        for (std::uint32_t m : {8u, 256u, 320u}) {
            for (int rep = 0; rep < 40; ++rep) {
                const BitVec r = BitVec::random(m, rng, 0.37);
                CHECK(BitVec::from_hex(r.to_hex(), m) == r);
                CHECK(r.to_hex().size() == m / 4);
            }
        }
    }
    SUBCASE("bad hex rejected") {
        CHECK_THROWS_AS(BitVec::from_hex("01", 16), std::invalid_argument);
        CHECK_THROWS_AS(BitVec::from_hex("01xz", 16), std::invalid_argument);
    }
}

TEST_CASE("width mismatches are construction errors") {
    const FilterParams params(256, 5, 1.0);
    Rng rng = Rng::from_seed(55);
    const LinkId narrow = new_link_id(FilterParams(64, 5, 1.0), rng);
    CHECK_THROWS_AS(build_fid(std::vector{narrow}, params), std::invalid_argument);
    CHECK_THROWS_AS(LinkId(BitVec(256), params), std::invalid_argument);   // zero bits, not k
}
