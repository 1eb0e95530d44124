#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace pairsketch;
using pairsketch::support::random_matrix;

TEST(SampleIndices, DegenerateDistribution)
{
    const SamplingDistribution one(single_group(3), {1.0});
    for (std::size_t r : sample_indices(one, 50, 7)) EXPECT_EQ(r, 0u);
    EXPECT_THROW(sample_indices(one, 0, 7), std::invalid_argument);
}

TEST(SampleIndices, FrequenciesFollowProbabilities)
{
    const SamplingDistribution half(finest(2), {0.5, 0.5});
    const auto draws = sample_indices(half, 100000, 2024);
    const auto counts = draw_counts(draws, 2);
    for (std::size_t c : counts) {
        EXPECT_GE(c / 1e5, 0.49);
        EXPECT_LE(c / 1e5, 0.51);
    }
}

TEST(SampleIndices, DeterministicAndPrefixStable)
{
    const SamplingDistribution d(finest(3), {0.2, 0.3, 0.5});
    const auto x = sample_indices(d, 1000, 99);
    EXPECT_EQ(x, sample_indices(d, 1000, 99));
    const auto prefix = sample_indices(d, 10, 99);
    EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), x.begin()));
    EXPECT_NE(x, sample_indices(d, 1000, 100));
}

TEST(SampleIndices, ZeroProbabilityNeverDrawn)
{
    const SamplingDistribution d(finest(4), {0.0, 0.5, 0.0, 0.5});
    for (std::size_t r : sample_indices(d, 20000, 3)) EXPECT_TRUE(r == 1 || r == 3);
    const CategoricalSampler trailing_zero(std::vector<double>{0.5, 0.5, 0.0});
    EXPECT_EQ(trailing_zero(std::nextafter(1.0, 0.0)), 1u);
    EXPECT_EQ(trailing_zero(0.0), 0u);
}

TEST(Sketch, SingleGroupRecoversProductExactly)
{
    std::mt19937_64 gen(67);
    const auto a = random_matrix(gen, 4, 6);
    const auto b = random_matrix(gen, 6, 3);
    const SamplingDistribution one(single_group(6), {1.0});
    for (std::size_t c : {1u, 2u, 7u, 100u}) {
        EXPECT_EQ(sketch(a, b, one, {c, c}).estimate, multiply(a, b)) << "c=" << c;
    }
}

TEST(Sketch, OneDrawIsScaledBlock)
{
    std::mt19937_64 gen(71);
    const auto a = random_matrix(gen, 3, 4);
    const auto b = random_matrix(gen, 4, 2);
    const auto dist = optimal_distribution(a, b, finest(4));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = sketch(a, b, dist, {1, seed});
        const std::size_t l = s.draws.at(0);
        const auto blk = block_product(a, b, dist.support().group(l));
        for (std::size_t e = 0; e < blk.size(); ++e) {
            EXPECT_NEAR(s.estimate.values()[e], blk.values()[e] / dist[l], 1e-15 * (1 + std::abs(blk.values()[e])));
        }
    }
}

TEST(Sketch, EnumeratedMeanEqualsProduct)
{
    std::mt19937_64 gen(73);
    const auto a = random_matrix(gen, 2, 4);
    const auto b = random_matrix(gen, 4, 2);
    const auto dist = optimal_distribution(a, b, finest(4));
    const auto e = support::enumerate_estimates(a, b, dist, 3);
    EXPECT_LE(support::max_abs_diff(e.mean, multiply(a, b)), 1e-12);
}

TEST(Sketch, EnumeratedMeanEqualsProductOnRandomCoarsenings)
{
    std::mt19937_64 gen(79);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = support::random_size(gen, 1, 6);
        const auto a = random_matrix(gen, support::random_size(gen, 1, 3), n);
        const auto b = random_matrix(gen, n, support::random_size(gen, 1, 3));
        auto p = support::random_partition(gen, n);
        while (p.size() > 4) p = support::random_partition(gen, n);
        const SamplingDistribution dist(p, support::random_probabilities(gen, p.size()));
        const auto e = support::enumerate_estimates(a, b, dist, support::random_size(gen, 1, 4));
        EXPECT_LE(support::max_abs_diff(e.mean, multiply(a, b)), 1e-12);
    }
}

TEST(Sketch, MonteCarloMeanWithinFourStandardErrors)
{
    std::mt19937_64 gen(83);
    const auto a = random_matrix(gen, 2, 5);
    const auto b = random_matrix(gen, 5, 2);
    const auto dist = optimal_distribution(a, b, finest(5));
    const std::size_t trials = 100000;
    const auto ab = multiply(a, b);
    std::vector<double> sum(ab.size(), 0.0), sum_sq(ab.size(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto s = sketch(a, b, dist, {3, rng::derive(17, t)});
        for (std::size_t e = 0; e < ab.size(); ++e) {
            sum[e] += s.estimate.values()[e];
            sum_sq[e] += s.estimate.values()[e] * s.estimate.values()[e];
        }
    }
    for (std::size_t e = 0; e < ab.size(); ++e) {
        const double mean = sum[e] / trials;
        const double var = (sum_sq[e] / trials - mean * mean) * trials / (trials - 1.0);
        EXPECT_LE(std::abs(mean - ab.values()[e]), 4.0 * std::sqrt(var / trials)) << "entry " << e;
    }
}

TEST(Sketch, ResultInvariants)
{
    std::mt19937_64 gen(89);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = support::random_size(gen, 1, 10);
        const auto a = random_matrix(gen, 3, n);
        const auto b = random_matrix(gen, n, 4);
        const auto p = support::random_partition(gen, n);
        const auto dist = optimal_distribution(a, b, p);
        const std::size_t c = support::random_size(gen, 1, 40);
        const auto s = sketch(a, b, p, dist, {c, gen()});
        EXPECT_EQ(s.draws.size(), c);
        EXPECT_EQ(s.counts, draw_counts(s.draws, p.size()));
        EXPECT_EQ(std::accumulate(s.counts.begin(), s.counts.end(), std::size_t{0}), c);
        for (std::size_t r : s.draws) EXPECT_LT(r, p.size());
        EXPECT_EQ(s.estimate.rows(), 3u);
        EXPECT_EQ(s.estimate.cols(), 4u);
    }
}

TEST(Sketch, DeterministicBitForBit)
{
    std::mt19937_64 gen(97);
    const auto a = random_matrix(gen, 5, 12);
    const auto b = random_matrix(gen, 12, 5);
    const auto dist = optimal_distribution(a, b, finest(12));
    const auto x = sketch(a, b, dist, {30, 1234});
    const auto y = sketch(a, b, dist, {30, 1234});
    EXPECT_EQ(x.estimate, y.estimate);
    EXPECT_EQ(x.draws, y.draws);
    EXPECT_EQ(x.counts, y.counts);
}

TEST(Sketch, SupportMismatchRejected)
{
    const auto a = DenseMatrix::identity(4);
    const auto dist = optimal_distribution(a, a, finest(4));
    EXPECT_THROW(sketch(a, a, single_group(4), dist, {1, 0}), std::invalid_argument);
    EXPECT_THROW(sketch(a, DenseMatrix::identity(3), dist, {1, 0}), dimension_error);
}

TEST(Sketch, PathwiseFrobeniusBound)
{
    std::mt19937_64 gen(101);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = support::random_size(gen, 1, 12);
        const auto a = random_matrix(gen, 4, n);
        const auto b = random_matrix(gen, n, 3);
        const auto p = support::random_partition(gen, n);
        const auto dist = optimal_distribution(a, b, p);
        const auto w = element_weights(a, b, p);
        const double m = std::accumulate(w.begin(), w.end(), 0.0);
        const auto s = sketch(a, b, dist, {support::random_size(gen, 1, 20), gen()});
        const double f = frobenius_norm(s.estimate);
        EXPECT_LE(f, m + 1e-9);
        EXPECT_LE(spectral_norm(s.estimate), f * (1 + 1e-12) + 1e-14);
    }
}

TEST(ElementContribution, NeverDrawnIsZero)
{
    const auto a = DenseMatrix::identity(3);
    const SamplingDistribution dist(finest(3), {0.2, 0.3, 0.5});
    const std::vector<std::size_t> draws{0, 2, 2};
    EXPECT_EQ(element_contribution(a, a, dist, draws, 1), DenseMatrix::zeros(3, 3));
    EXPECT_THROW(element_contribution(a, a, dist, draws, 3), std::out_of_range);
}

TEST(ElementContribution, SingleGroupIsFullEstimate)
{
    std::mt19937_64 gen(103);
    const auto a = random_matrix(gen, 3, 4);
    const auto b = random_matrix(gen, 4, 3);
    const SamplingDistribution one(single_group(4), {1.0});
    const auto s = sketch(a, b, one, {5, 1});
    EXPECT_EQ(element_contribution(a, b, single_group(4), one, s.draws, 0), s.estimate);
}

TEST(ElementContribution, ContributionsSumToEstimateExactly)
{
    std::mt19937_64 gen(107);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = support::random_size(gen, 1, 10);
        const auto a = random_matrix(gen, 3, n);
        const auto b = random_matrix(gen, n, 3);
        const auto p = support::random_partition(gen, n);
        const auto dist = optimal_distribution(a, b, p);
        const auto s = sketch(a, b, dist, {support::random_size(gen, 1, 30), gen()});
        std::vector<double> sum(s.estimate.size(), 0.0);
        for (std::size_t l = 0; l < p.size(); ++l) {
            const auto part = element_contribution(a, b, dist, s.draws, l);
            for (std::size_t e = 0; e < sum.size(); ++e) sum[e] += part.values()[e];
        }
        EXPECT_EQ(DenseMatrix(3, 3, sum), s.estimate);
    }
}

TEST(ElementContribution, EnumeratedMomentsMatchBinomialCounts)
{
    // N_l ~ Binomial(c, p_l), so E[S_l] = X_l and
    // E||S_l||^2 = w_l^2 (1 + (1 - p_l) / (c p_l)).
    std::mt19937_64 gen(109);
    const auto a = random_matrix(gen, 2, 3);
    const auto b = random_matrix(gen, 3, 2);
    const SamplingDistribution dist(finest(3), {0.2, 0.3, 0.5});
    const std::size_t c = 4;
    for (std::size_t l = 0; l < 3; ++l) {
        std::vector<double> mean(4, 0.0);
        double mean_sq = 0.0;
        std::vector<std::size_t> seq(c);
        for (std::size_t o = 0; o < 81; ++o) {
            std::size_t code = o;
            double prob = 1.0;
            for (auto& r : seq) {
                r = code % 3;
                code /= 3;
                prob *= dist[r];
            }
            const auto part = element_contribution(a, b, dist, seq, l);
            for (std::size_t e = 0; e < 4; ++e) mean[e] += prob * part.values()[e];
            mean_sq += prob * squared_frobenius_norm(part);
        }
        const auto blk = block_product(a, b, dist.support().group(l));
        EXPECT_LE(support::max_abs_diff(DenseMatrix(2, 2, mean), blk), 1e-13);
        const double w2 = squared_frobenius_norm(blk);
        EXPECT_NEAR(mean_sq, w2 * (1.0 + (1.0 - dist[l]) / (c * dist[l])), 1e-12 * (1 + w2));
    }
}

TEST(SketchPairwise, TwoColumnsRecoverProduct)
{
    std::mt19937_64 gen(113);
    const auto a = random_matrix(gen, 3, 2);
    const auto b = random_matrix(gen, 2, 4);
    for (std::size_t c : {1u, 3u, 50u}) {
        EXPECT_EQ(sketch_pairwise(a, b, {}, {c, c}).estimate, multiply(a, b));
    }
    EXPECT_THROW(sketch_pairwise(DenseMatrix::identity(1), DenseMatrix::identity(1), {}, {1, 0}),
                 std::invalid_argument);
}

TEST(SketchPairwise, EqualColumnNormsGiveUniformPairs)
{
    // Signed permutation-like columns: every column has unit norm.
    const DenseMatrix a{{1, 0, -1, 0, 0, 0}, {0, 1, 0, 0, -1, 0}, {0, 0, 0, 1, 0, 1}};
    const auto plan = pairwise_plan(a, transpose(a), {});
    ASSERT_EQ(plan.aggregated.size(), 3u);
    for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(plan.aggregated[l], 2.0 / 6.0, 1e-15);
}

TEST(SketchPairwise, EnumeratedMeanEqualsProduct)
{
    std::mt19937_64 gen(127);
    const auto a = random_matrix(gen, 3, 4);
    const auto b = random_matrix(gen, 4, 2);
    const auto plan = pairwise_plan(a, b, {PairingKind::enhanced});
    ASSERT_EQ(plan.aggregated.size(), 2u);
    const auto e = support::enumerate_estimates(a, b, plan.aggregated, 2);
    EXPECT_LE(support::max_abs_diff(e.mean, multiply(a, b)), 1e-12);
}

TEST(SketchPairwise, DrawAddsBothOuterProducts)
{
    std::mt19937_64 gen(131);
    const auto a = random_matrix(gen, 3, 4);
    const auto b = random_matrix(gen, 4, 2);
    const auto plan = pairwise_plan(a, b, {});
    const SketchConfig cfg{1, 77};
    const auto s = sketch_pairwise(a, b, {}, cfg);
    const std::size_t l = s.draws.at(0);
    const auto g = plan.aggregated.support().group(l);
    ASSERT_EQ(g.size(), 2u);
    const double p = plan.finest[g[0]] + plan.finest[g[1]];
    EXPECT_NEAR(plan.aggregated[l], p, 1e-16);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double outer = a(i, g[0]) * b(g[0], j) + a(i, g[1]) * b(g[1], j);
            EXPECT_NEAR(s.estimate(i, j), outer / plan.aggregated[l], 1e-13);
        }
}
