#include <gtest/gtest.h>

#include <random>

#include "isb/matcher.hpp"
#include "oracle.hpp"

using namespace isb;

namespace {

iris_template bits8(const std::string& s) {
    bit_vector code(8);
    for (std::size_t i = 0; i < 8; ++i)
        code.set(i, s[i] == '1');
    return iris_template::full_mask(geometry{1, 8, 1}, code);
}

oracle::plain_template full(oracle::plain_template t) {
    std::fill(t.mask.begin(), t.mask.end(), 1);
    return t;
}

} // namespace

TEST(FractionalHamming, HandExample) {
    EXPECT_DOUBLE_EQ(fractional_hamming(bits8("10110010"), bits8("10010110")).value(), 0.25);
}

TEST(FractionalHamming, SelfAndComplement) {
    const auto a = bits8("10110010");
    EXPECT_EQ(fractional_hamming(a, a).value(), 0.0);
    EXPECT_EQ(fractional_hamming(a, bits8("01001101")).value(), 1.0);
}

TEST(FractionalHamming, Errors) {
    const auto a = bits8("10110010");
    const auto b = iris_template::full_mask(geometry{2, 4, 1}, bit_vector(8));
    try {
        fractional_hamming(a, b);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::incompatible_templates);
    }
    bit_vector m1(8), m2(8);
    m1.set(0);
    m2.set(1);
    const iris_template c(geometry{1, 8, 1}, bit_vector(8), m1), d(geometry{1, 8, 1}, bit_vector(8), m2);
    try {
        fractional_hamming(c, d);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::no_overlap);
    }
}

TEST(FractionalHamming, MatchesOracleOnRandomPairs) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = 1 + rng() % 4, cols = 1 + rng() % 24, bpc = 1 + rng() % 2;
        const auto a = oracle::random_template(rng, rows, cols, bpc, 0.7);
        const auto b = oracle::random_template(rng, rows, cols, bpc, 0.7);
        const auto k = oracle::count(a, b);
        const auto ta = oracle::to_template(a), tb = oracle::to_template(b);
        const auto c = aligned_counts(ta, tb);
        ASSERT_EQ(c.differing, k.differing);
        ASSERT_EQ(c.valid, k.valid);
        if (k.valid > 0) {
            ASSERT_EQ(fractional_hamming(ta, tb).value(), oracle::hamming(k));
            ASSERT_EQ(fractional_hamming(ta, tb), fractional_hamming(tb, ta));
        }
    }
}

TEST(FractionalHamming, ShiftEquivariant) {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = oracle::to_template(oracle::random_template(rng, 3, 12, 2));
        const auto b = oracle::to_template(oracle::random_template(rng, 3, 12, 2));
        const int s = static_cast<int>(rng() % 23) - 11;
        ASSERT_EQ(aligned_counts(rotate_template(a, s), rotate_template(b, s)).differing,
                  aligned_counts(a, b).differing);
        ASSERT_EQ(aligned_counts(rotate_template(a, s), rotate_template(b, s)).valid, aligned_counts(a, b).valid);
    }
}

TEST(SelectBest, PicksLowestScoreAcrossShifts) {
    // shifts -1, 0, +1 score 0.45, 0.40, 0.20
    const std::vector<pair_counts> counts{{9, 20}, {8, 20}, {4, 20}};
    const shift_range r{-1, 1};
    const auto order = r.search_order();
    const auto best = select_best<hamming_matcher>(counts, -1, order);
    ASSERT_TRUE(best);
    EXPECT_DOUBLE_EQ(best->value.value(), 0.20);
    EXPECT_EQ(best->shift, 1);
}

TEST(SelectBest, TieBreakPrefersSmallMagnitudeThenNegative) {
    const shift_range r{-2, 2};
    const auto order = r.search_order();
    EXPECT_EQ(order, (std::vector<int>{0, -1, 1, -2, 2}));
    std::vector<pair_counts> c{{1, 10}, {5, 10}, {5, 10}, {1, 10}, {1, 10}};
    EXPECT_EQ(select_best<hamming_matcher>(c, -2, order)->shift, 1);
    c = {{1, 10}, {1, 10}, {5, 10}, {1, 10}, {5, 10}};
    EXPECT_EQ(select_best<hamming_matcher>(c, -2, order)->shift, -1);
    c = {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}};
    EXPECT_FALSE(select_best<hamming_matcher>(c, -2, order));
}

TEST(BestOfRotations, RecoversKnownRotation) {
    std::mt19937_64 rng(103);
    const auto a = oracle::to_template(full(oracle::random_template(rng, 4, 32, 2)));
    const auto m = best_of_rotations(a, rotate_template(a, 3), shift_range::symmetric(7));
    EXPECT_EQ(m.value.value(), 0.0);
    EXPECT_EQ(m.shift, -3);
}

TEST(BestOfRotations, DegenerateRangeIsPlainHamming) {
    std::mt19937_64 rng(104);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = oracle::to_template(oracle::random_template(rng, 2, 10, 2));
        const auto b = oracle::to_template(oracle::random_template(rng, 2, 10, 2));
        const auto m = best_of_rotations(a, b, shift_range{0, 0});
        EXPECT_EQ(m.value, fractional_hamming(a, b));
        EXPECT_EQ(m.shift, 0);
    }
}

TEST(BestOfRotations, MatchesOracleForBothPolarities) {
    std::mt19937_64 rng(105);
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = 1 + rng() % 3, cols = 2 + rng() % 14, bpc = 1 + rng() % 2;
        // Small code lengths make exact ties between shifts common.
        const auto a = oracle::random_template(rng, rows, cols, bpc, 0.6);
        const auto b = oracle::random_template(rng, rows, cols, bpc, 0.6);
        const int k = static_cast<int>(rng() % cols);
        const auto ta = oracle::to_template(a), tb = oracle::to_template(b);
        const auto want = oracle::best(a, b, -k, k);
        if (!want) {
            EXPECT_THROW(best_of_rotations(ta, tb, shift_range::symmetric(k)), error);
            continue;
        }
        const auto got = best_of_rotations(ta, tb, shift_range::symmetric(k));
        ASSERT_EQ(got.value.value(), want->value);
        ASSERT_EQ(got.shift, want->shift);
        const auto want_s = oracle::best(a, b, -k, k, true);
        const auto got_s = best_of_rotations<agreement_matcher>(ta, tb, shift_range::symmetric(k));
        ASSERT_EQ(got_s.value.value(), want_s->value);
        ASSERT_EQ(got_s.shift, want_s->shift);
        ASSERT_EQ(got_s.value.pol(), polarity::similarity);
    }
}

TEST(BestOfRotations, WideningNeverWorsens) {
    std::mt19937_64 rng(106);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = oracle::to_template(oracle::random_template(rng, 2, 30, 2));
        const auto b = oracle::to_template(oracle::random_template(rng, 2, 30, 2));
        double prev = 1.0, prev_s = 0.0;
        for (int k = 0; k < 15; ++k) {
            const double v = best_of_rotations(a, b, shift_range::symmetric(k)).value.value();
            const double s = best_of_rotations<agreement_matcher>(a, b, shift_range::symmetric(k)).value.value();
            ASSERT_LE(v, prev);
            ASSERT_GE(s, prev_s);
            prev = v;
            prev_s = s;
        }
    }
}

TEST(RotatedProbe, CountsEqualRotatingTheReference) {
    std::mt19937_64 rng(107);
    const auto p = oracle::to_template(oracle::random_template(rng, 3, 20, 2));
    const auto ref = oracle::to_template(oracle::random_template(rng, 3, 20, 2));
    const rotated_probe rp(p, shift_range{-5, 6});
    for (int s = -5; s <= 6; ++s) {
        const auto want = aligned_counts(p, rotate_template(ref, s));
        EXPECT_EQ(rp.counts(s, ref).differing, want.differing);
        EXPECT_EQ(rp.counts(s, ref).valid, want.valid);
    }
}

TEST(Score, PolarityRules) {
    EXPECT_THROW(score(1.5, polarity::dissimilarity), error);
    EXPECT_THROW(score(-1.0, polarity::similarity), error);
    EXPECT_NO_THROW(score(120.0, polarity::similarity));
    try {
        (void)score(0.1, polarity::dissimilarity).better_than(score(3.0, polarity::similarity));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::polarity_mismatch);
    }
    EXPECT_TRUE(score(0.1, polarity::dissimilarity).better_than(score(0.2, polarity::dissimilarity)));
    EXPECT_TRUE(score(50, polarity::similarity).better_than(score(20, polarity::similarity)));
}

TEST(Threshold, MeetsThreshold) {
    const threshold d{0.32, polarity::dissimilarity, 1e-3, 0.0};
    EXPECT_TRUE(meets_threshold(score(0.30, polarity::dissimilarity), d));
    EXPECT_TRUE(meets_threshold(score(0.32, polarity::dissimilarity), d));
    EXPECT_FALSE(meets_threshold(score(0.33, polarity::dissimilarity), d));
    const threshold s{42, polarity::similarity, 1e-4, 0.0};
    EXPECT_TRUE(meets_threshold(score(45, polarity::similarity), s));
    EXPECT_FALSE(meets_threshold(score(41, polarity::similarity), s));
    EXPECT_THROW(meets_threshold(score(45, polarity::similarity), d), error);
}

TEST(AccuracyTarget, OpenInterval) {
    EXPECT_THROW(accuracy_target(0.0), error);
    EXPECT_THROW(accuracy_target(1.0), error);
    EXPECT_NO_THROW(accuracy_target(1e-6));
}

TEST(RotationPolicy, NamesRoundTrip) {
    for (const auto& p : {rotation_policy::single(7), rotation_policy::two_stage(7, 21), rotation_policy::single(0)})
        EXPECT_EQ(rotation_policy::parse(p.name()), p);
    const auto p = rotation_policy::two_stage(7, 21);
    EXPECT_EQ(p.effective(), shift_range::symmetric(21));
    EXPECT_EQ(p.narrow().size(), 15u);
    EXPECT_EQ(p.wide().size(), 43u);
    EXPECT_EQ(rotation_policy::single(7).effective(), shift_range::symmetric(7));
    EXPECT_THROW(rotation_policy::two_stage(9, 3), error);
    EXPECT_THROW(rotation_policy::parse("double_7"), error);
    EXPECT_THROW(rotation_policy::parse("two_stage_7"), error);
}
