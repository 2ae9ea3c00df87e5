#include <gtest/gtest.h>

#include <memory>

#include "oracles.hpp"
#include "rarefuse/benchmarks.hpp"
#include "rarefuse/errors.hpp"
#include "rarefuse/mfis.hpp"

using namespace rarefuse;

TEST(BuildBiasing, ConstantSurrogateFallsBack) {
    const auto b = linear_gaussian(2, 3.5);
    for (std::size_t m : {0u, 10u, 20000u}) {
        const auto r = build_biasing_density(b.surrogates[2], b.limit_state, b.nominal, m, RandomStream(1));
        EXPECT_TRUE(r.fell_back_to_nominal);
        EXPECT_EQ(r.failures_found, 0u);
        EXPECT_EQ(r.samples_drawn, m);
        EXPECT_TRUE(std::holds_alternative<GaussianMixture>(r.density));
        EXPECT_EQ(std::get<GaussianMixture>(r.density).components()[0].covariance, Matrix::Identity(2, 2));
    }
}

TEST(BuildBiasing, BiasedSurrogateFitsGaussian) {
    const auto b = linear_gaussian(2, 3.5);
    const auto r = build_biasing_density(b.surrogates[0], b.limit_state, b.nominal, 20000, RandomStream(2024));
    EXPECT_GT(r.failures_found, 0u);
    EXPECT_FALSE(r.fell_back_to_nominal);
    const auto& g = std::get<GaussianMixture>(r.density);
    ASSERT_EQ(g.components().size(), 1u);
    // failures of sum(z)/sqrt(2) + 0.2 > 3.5 sit along the diagonal beyond 3.3
    EXPECT_GT(g.components()[0].mean.sum() / std::sqrt(2.0), 3.3);
}

TEST(BuildBiasing, FitMatchesFailureSetMoments) {
    const auto b = linear_gaussian(2, 2.5);
    const auto r = build_biasing_density(b.surrogates[1], b.limit_state, b.nominal, 20000, RandomStream(3));
    ASSERT_FALSE(r.fell_back_to_nominal);
    const auto m = oracle::sample_moments(r.failure_samples);
    const auto& c = std::get<GaussianMixture>(r.density).components()[0];
    EXPECT_LT((c.mean - m.mean).lpNorm<Eigen::Infinity>(), 1e-12);
    const Matrix reg = kDefaultRegularization * Matrix(m.covariance.diagonal().asDiagonal());
    EXPECT_LT((c.covariance - m.covariance - reg).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(BuildBiasing, EveryFitPointSatisfiesRelaxedCondition) {
    const auto b = arrhenius_2d();
    BiasingOptions opts;
    opts.threshold_relax = 50.0;
    const auto r = build_biasing_density(b.surrogates[0], b.limit_state, b.nominal, 20000, RandomStream(4), opts);
    EXPECT_EQ(r.threshold_used, 50.0);
    EXPECT_GT(r.failures_found, 0u);
    for (const auto& z : r.failure_samples) EXPECT_TRUE(indicator(b.surrogates[0], b.limit_state, z, 50.0));
}

TEST(BuildBiasing, RelaxationIsMonotone) {
    const auto b = arrhenius_2d();
    std::size_t previous = 0;
    for (double t : {0.0, 5.0, 20.0, 100.0, 400.0}) {
        BiasingOptions opts;
        opts.threshold_relax = t;
        const auto r = build_biasing_density(b.surrogates[1], b.limit_state, b.nominal, 5000, RandomStream(5), opts);
        EXPECT_GE(r.failures_found, previous);
        previous = r.failures_found;
    }
    BiasingOptions bad;
    bad.threshold_relax = -1.0;
    EXPECT_THROW((void)build_biasing_density(b.surrogates[1], b.limit_state, b.nominal, 10, RandomStream(5), bad),
                 InvalidArgument);
}

TEST(BuildBiasing, TooFewFailuresFallsBack) {
    // d + 2 = 4 failures are needed in 2-D; this surrogate fails on its first 3 calls only
    const auto b = linear_gaussian(2, 3.5);
    auto calls = std::make_shared<int>(0);
    Model few{"few", 2, 1, [calls](const Vector&) { return Vector::Constant(1, ++*calls <= 3 ? 10.0 : 0.0); }, "low"};
    const auto r = build_biasing_density(few, b.limit_state, b.nominal, 400, RandomStream(6));
    EXPECT_EQ(r.failures_found, 3u);
    EXPECT_TRUE(r.fell_back_to_nominal);

    *calls = -1;  // now four failures
    const auto r4 = build_biasing_density(few, b.limit_state, b.nominal, 400, RandomStream(6));
    EXPECT_EQ(r4.failures_found, 4u);
    EXPECT_FALSE(r4.fell_back_to_nominal);
}

TEST(BuildBiasing, WorkerCountDoesNotChangeDensity) {
    const auto b = arrhenius_2d();
    BiasingOptions one, many;
    many.sampling.workers = 4;
    const auto r1 = build_biasing_density(b.surrogates[0], b.limit_state, b.nominal, 10000, RandomStream(7), one);
    const auto r4 = build_biasing_density(b.surrogates[0], b.limit_state, b.nominal, 10000, RandomStream(7), many);
    EXPECT_EQ(to_json(r1).dump(), to_json(r4).dump());
}

TEST(BuildBiasing, GaussianHasFullSupport) {
    const auto b = arrhenius_2d();
    const auto r = build_biasing_density(b.surrogates[0], b.limit_state, b.nominal, 20000, RandomStream(8));
    ASSERT_FALSE(r.fell_back_to_nominal);
    Vector far(2);
    far << 1e14, -1e5;
    EXPECT_GT(log_pdf(r.density, far), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(to_json(r)["fell_back_to_nominal"], false);
}
