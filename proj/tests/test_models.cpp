#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "rarefuse/arrhenius_constants.hpp"
#include "rarefuse/benchmarks.hpp"
#include "rarefuse/errors.hpp"
#include "rarefuse/models.hpp"

using namespace rarefuse;

TEST(Model, ChecksDimensions) {
    const auto b = linear_gaussian(2, 3.5);
    EXPECT_THROW((void)b.high_fidelity(Vector::Zero(3)), DimensionMismatch);
}

TEST(Model, WrapsForeignExceptions) {
    Model m{"boom", 1, 1, [](const Vector&) -> Vector { throw std::runtime_error("solver diverged"); }, "high"};
    EXPECT_THROW((void)m(Vector::Zero(1)), ModelError);
    Model nan{"nan", 1, 1, [](const Vector&) { return Vector::Constant(1, std::nan("")); }, "high"};
    EXPECT_THROW((void)nan(Vector::Zero(1)), ModelError);
}

TEST(Indicator, OriginIsSafeOnLinearGaussian) {
    const auto b = linear_gaussian(2, 3.5);
    EXPECT_DOUBLE_EQ(limit_state_value(b.high_fidelity, b.limit_state, Vector::Zero(2)), 3.5);
    EXPECT_FALSE(indicator(b.high_fidelity, b.limit_state, Vector::Zero(2)));
}

TEST(Indicator, TieCountsAsSafe) {
    Model id{"id", 1, 1, [](const Vector& z) { return z; }, "high"};
    LimitState ls{[](const Vector& y) { return y[0]; }};
    EXPECT_FALSE(indicator(id, ls, Vector::Zero(1)));
    EXPECT_TRUE(indicator(id, ls, Vector::Constant(1, -1e-300)));
}

TEST(Indicator, FarPointFails) {
    const std::size_t d = 4;
    const double beta = 3.5;
    const auto b = linear_gaussian(d, beta);
    // every component 2*beta*sqrt(d)/d so the mean component is 2*beta*sqrt(d)
    const Vector z = Vector::Constant(d, 2.0 * beta * std::sqrt(static_cast<double>(d)));
    EXPECT_TRUE(indicator(b.high_fidelity, b.limit_state, z));
}

TEST(Benchmarks, Registry) {
    const auto names = benchmark_names();
    ASSERT_EQ(names.size(), 2u);
    for (const auto& n : names) EXPECT_EQ(make_benchmark(n).name, n);
    EXPECT_THROW((void)make_benchmark("cdr"), InvalidArgument);
    EXPECT_EQ(make_benchmark("linear-gaussian").surrogates.size(), 3u);
    EXPECT_EQ(make_benchmark("arrhenius-2d").surrogates.size(), 3u);
}

TEST(Benchmarks, LinearGaussianOracle) {
    const auto b = linear_gaussian(2, 3.5);
    const double p = oracle_failure_probability(b, 0);
    EXPECT_NEAR(p, 2.3263e-4, 0.00005e-4);
    EXPECT_NEAR(p / oracle::normal_upper_tail(3.5), 1.0, 1e-9);
    EXPECT_NEAR(standard_normal_cdf(-2.0) / oracle::normal_upper_tail(2.0), 1.0, 1e-9);
}

TEST(Benchmarks, ConstantSurrogateNeverFails) {
    const auto b = linear_gaussian(3, 3.5);
    auto gen = RandomStream(3).generator();
    for (const auto& z : sample(b.nominal, gen, 5000)) {
        EXPECT_FALSE(indicator(b.surrogates[2], b.limit_state, z));
    }
}

TEST(Benchmarks, ArrheniusRangeAndOracle) {
    const auto b = arrhenius_2d();
    const auto& box = std::get<UniformBox>(b.nominal);
    // f is monotone in both inputs: increasing in A, decreasing in E
    Vector lo(2), hi(2);
    lo << box.lower()[0], box.upper()[1];
    hi << box.upper()[0], box.lower()[1];
    EXPECT_NEAR(b.high_fidelity(lo)[0], 1200.1, 0.1);
    EXPECT_NEAR(b.high_fidelity(hi)[0], 2495.8, 0.1);

    const double fine = oracle_failure_probability(b, 4001, 0);
    const double coarse = oracle_failure_probability(b, 2001, 0);
    EXPECT_EQ(fine, arrhenius::kOracleProbability4001);
    EXPECT_EQ(coarse, arrhenius::kOracleProbability2001);
    EXPECT_GE(fine, 5e-4);
    EXPECT_LE(fine, 5e-3);
    EXPECT_LT(std::abs(fine - coarse) / fine, 0.05);
}

TEST(Benchmarks, ArrheniusOracleMatchesIndependentGrid) {
    // Direct re-implementation of the frozen formula, evaluated on a 1001 grid.
    using namespace arrhenius;
    const int res = 1001;
    long hits = 0;
    for (int i = 0; i < res; ++i) {
        const double a = kPreExponentialMin + (kPreExponentialMax - kPreExponentialMin) * (i + 0.5) / res;
        for (int j = 0; j < res; ++j) {
            const double e = kActivationMin + (kActivationMax - kActivationMin) * (j + 0.5) / res;
            const double f = kBaseTemperature +
                             kTemperatureScale * (std::log(1.0 + a * std::exp(-e / (kGasConstant * kAmbientTemperature))) -
                                                  kLogReference);
            hits += f > kThreshold;
        }
    }
    const double p = static_cast<double>(hits) / (static_cast<double>(res) * res);
    EXPECT_NEAR(oracle_failure_probability(arrhenius_2d(), res, 1) / p, 1.0, 1e-2);
}

TEST(Benchmarks, ThresholdAboveMaximumGivesZero) {
    const auto b = arrhenius_2d(3000.0);
    EXPECT_EQ(oracle_failure_probability(b, 201, 1), 0.0);
    EXPECT_THROW((void)oracle_failure_probability(b, 100, 1), InvalidArgument);
}

TEST(Benchmarks, ModelsAreDeterministic) {
    for (const auto& name : benchmark_names()) {
        const auto b = make_benchmark(name);
        auto gen = RandomStream(8).generator();
        for (const auto& z : sample(b.nominal, gen, 50)) {
            EXPECT_EQ(b.high_fidelity(z), b.high_fidelity(z));
            for (const auto& s : b.surrogates) EXPECT_EQ(s(z), s(z));
        }
    }
}

TEST(Benchmarks, OptionsValidated) {
    EXPECT_THROW((void)make_benchmark("arrhenius-2d", {.dim = std::nullopt, .beta = 2.0, .threshold = std::nullopt}),
                 InvalidArgument);
    EXPECT_THROW((void)make_benchmark("linear-gaussian", {.dim = 0, .beta = std::nullopt, .threshold = std::nullopt}),
                 InvalidArgument);
    EXPECT_EQ(make_benchmark("linear-gaussian", {.dim = 5, .beta = std::nullopt, .threshold = std::nullopt})
                  .high_fidelity.input_dim,
              5u);
}
