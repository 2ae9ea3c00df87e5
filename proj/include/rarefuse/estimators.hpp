#pragma once

#include <cstddef>
#include <string>

#include "rarefuse/densities.hpp"
#include "rarefuse/models.hpp"
#include "rarefuse/rng.hpp"
#include "rarefuse/sampling.hpp"

namespace rarefuse {

enum class EstimatorKind { MonteCarlo, ImportanceSampling };

[[nodiscard]] const char* to_string(EstimatorKind kind);

/// One unbiased failure-probability estimate.
struct EstimatorResult {
    double estimate = 0.0;
    std::size_t n = 0;
    /// Unbiased (n - 1 divisor) variance of the per-sample terms.
    double sample_variance = 0.0;
    /// Raw failure count, also in IS mode.
    std::size_t hits = 0;
    std::string density_id;
    EstimatorKind kind = EstimatorKind::MonteCarlo;

    /// Variance of the estimator itself: sample_variance / n.
    [[nodiscard]] double estimator_variance() const {
        return sample_variance / static_cast<double>(n);
    }
};

/// Plain Monte Carlo with draws from the nominal density. Requires n >= 1.
[[nodiscard]] EstimatorResult monte_carlo_estimate(const Model& model, const LimitState& ls,
                                                   const Density& nominal, std::size_t n,
                                                   const RandomStream& stream,
                                                   const SamplingOptions& options = {},
                                                   std::string density_id = "nominal");

/// Importance sampling with draws from `biasing`, weighted by p/q.
///
/// Requires n >= 2. Samples with p(z) = 0 contribute zero and the model is
/// not evaluated there. q(z) = 0 at a drawn sample throws Error. Weighted
/// terms are summed in sample order with compensated summation, so the
/// result does not depend on options.workers.
[[nodiscard]] EstimatorResult importance_sampling_estimate(const Model& model, const LimitState& ls,
                                                           const Density& nominal,
                                                           const Density& biasing, std::size_t n,
                                                           const RandomStream& stream,
                                                           const SamplingOptions& options = {},
                                                           std::string density_id = "biasing");

/// sqrt(sample_variance / n).
[[nodiscard]] double rmse(const EstimatorResult& result);

/// sqrt(sample_variance / (n * estimate^2)). Throws UndefinedCv at estimate 0.
[[nodiscard]] double cv(const EstimatorResult& result);

/// sqrt((1 - P) / (n P)) for plain Monte Carlo. Requires 0 < P < 1, n >= 1.
[[nodiscard]] double theoretical_mc_cv(double probability, std::size_t n);

/// density_id,kind,n,estimate,sample_variance,hits,rmse,cv
[[nodiscard]] std::string estimator_csv_header();
[[nodiscard]] std::string estimator_csv_row(const EstimatorResult& result);

/// printf("%.17g"); "nan"/"inf" for non-finite values.
[[nodiscard]] std::string format_double(double value);

}  // namespace rarefuse
