#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include <cliquedecomp/random.hpp>

using cliquedecomp::Xoshiro256;

TEST(Xoshiro256, MatchesReferenceStream) {
    Xoshiro256 zero(0);
    EXPECT_EQ(zero(), 0x99ec5f36cb75f2b4ULL);
    EXPECT_EQ(zero(), 0xbf6e1f784956452aULL);
    EXPECT_EQ(zero(), 0x1a5f849d4933e6e0ULL);
    EXPECT_EQ(zero(), 0x6aa594f1262d2d2cULL);

    Xoshiro256 answer(42);
    EXPECT_EQ(answer(), 0x15780b2e0c2ec716ULL);
    EXPECT_EQ(answer(), 0x6104d9866d113a7eULL);
    EXPECT_EQ(answer(), 0xae17533239e499a1ULL);
    EXPECT_EQ(answer(), 0xecb8ad4703b360a1ULL);
}

TEST(Xoshiro256, SameSeedSameStream) {
    Xoshiro256 a(123), b(123), c(124);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs |= x != c();
    }
    EXPECT_TRUE(differs);
}

TEST(Xoshiro256, UniformMomentsWithinFourSigma) {
    Xoshiro256 rng(7);
    const int count = 200000;
    double sum = 0.0;
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    const double sigma = std::sqrt(1.0 / 12.0 / count);
    EXPECT_NEAR(sum / count, 0.5, 4.0 * sigma);
}

TEST(Xoshiro256, NormalMomentsWithinFourSigma) {
    Xoshiro256 rng(11);
    const int count = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < count; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / count, 0.0, 4.0 / std::sqrt(count));
    // Var(z²) = 2 for a standard normal.
    EXPECT_NEAR(sq / count, 1.0, 4.0 * std::sqrt(2.0 / count));
}

TEST(Xoshiro256, BelowCoversRangeUniformly) {
    Xoshiro256 rng(5);
    const int bound = 7, count = 70000;
    std::vector<int> hist(bound, 0);
    for (int i = 0; i < count; ++i) {
        const auto v = rng.below(bound);
        ASSERT_LT(v, static_cast<std::uint64_t>(bound));
        ++hist[v];
    }
    const double mean = static_cast<double>(count) / bound;
    const double sigma = std::sqrt(count * (1.0 / bound) * (1.0 - 1.0 / bound));
    for (int h : hist) EXPECT_NEAR(h, mean, 4.0 * sigma);
}

TEST(Xoshiro256, BernoulliRate) {
    Xoshiro256 rng(3);
    const int count = 100000;
    const double p = 0.3;
    int hits = 0;
    for (int i = 0; i < count; ++i) hits += rng.bernoulli(p) ? 1 : 0;
    EXPECT_NEAR(hits, p * count, 4.0 * std::sqrt(count * p * (1 - p)));
}
