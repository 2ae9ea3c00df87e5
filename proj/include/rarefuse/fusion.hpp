#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rarefuse/densities.hpp"
#include "rarefuse/estimators.hpp"

namespace rarefuse {

/// Covariance between k unbiased estimators.
class CovarianceMatrix {
public:
    /// Throws InvalidArgument unless square, finite, and symmetric within
    /// 1e-14 relative to the largest entry.
    explicit CovarianceMatrix(Matrix entries);

    [[nodiscard]] static CovarianceMatrix diagonal(std::span<const double> variances);

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    [[nodiscard]] const Matrix& entries() const { return entries_; }
    [[nodiscard]] bool is_diagonal() const;

    /// 1-norm condition estimate from a Cholesky factorization (LAPACK
    /// dpocon); +inf when the matrix is not positive definite.
    [[nodiscard]] double condition_estimate() const;

    /// Submatrix over the given indices.
    [[nodiscard]] CovarianceMatrix select(std::span<const std::size_t> indices) const;

private:
    Matrix entries_;
};

inline constexpr double kSingularConditionThreshold = 1e12;

struct WeightSolution {
    Vector weights;
    /// Lagrange multiplier of the block system [S 1; 1' 0][a; l] = [0; 1],
    /// equal to -variance at the optimum.
    double multiplier = 0.0;
    double variance = 0.0;
};

/// Minimum-variance weights summing to one, from the (k+1)x(k+1) KKT system
/// (symmetric-indefinite factorization plus one refinement step). Weights
/// may be negative for correlated estimators.
///
/// Throws SingularCovariance when the condition estimate exceeds 1e12 or
/// the matrix is not positive definite; use optimal_weights_diagonal then.
[[nodiscard]] WeightSolution optimal_weights(const CovarianceMatrix& covariance);

/// Inverse-variance weighting: a_i = (1/s_i) / sum(1/s_l), variance 1/sum(1/s_l).
[[nodiscard]] WeightSolution optimal_weights_diagonal(std::span<const double> variances);

struct FusedResult {
    double estimate = 0.0;
    /// One weight per input; excluded inputs carry weight 0.
    Vector weights;
    double multiplier = 0.0;
    double variance = 0.0;
    /// Covariance over all inputs (diagonal entries after flooring).
    Matrix covariance_used;
    std::vector<std::size_t> excluded;
    std::vector<std::size_t> floored;
    bool no_information = false;
    std::vector<std::string> warnings;
    std::vector<EstimatorResult> inputs;
};

/// Variance floor applied to zero-variance inputs with a positive estimate.
inline constexpr double kVarianceFloor = 1e-300;

/// Fuses k >= 1 unbiased estimates.
///
/// Inputs with zero variance and zero estimate carry no information and are
/// excluded; zero variance with a positive estimate is floored to 1e-300
/// and flagged. With assume_independent the covariance is
/// diag(sample_variance_i / n_i); otherwise `covariance` (k x k) is required.
/// If every input is excluded the result has estimate 0 and no_information.
[[nodiscard]] FusedResult fuse(std::span<const EstimatorResult> results, bool assume_independent = true,
                               const std::optional<CovarianceMatrix>& covariance = std::nullopt);

/// max_i |a_i - rhs_i| for the component-wise fixed point of the optimality
/// conditions:
///
///   mu    = (1 + sum_l (1/S_ll) sum_{j!=l} a_j S_lj) / sum_l (1/S_ll)
///   rhs_i = (1/S_ii) (mu - sum_{j!=i} a_j S_ij)
///
/// Zero for optimal weights. Requires sum(weights) = 1.
[[nodiscard]] double componentwise_weight_residual(const CovarianceMatrix& covariance,
                                                   const Vector& weights);

/// True iff candidate_variance > k / sum(1/s_i), i.e. splitting a budget
/// equally over the k estimators and fusing beats spending it all on the
/// candidate density.
[[nodiscard]] bool dominance_criterion(std::span<const double> variances, double candidate_variance);

[[nodiscard]] nlohmann::json to_json(const FusedResult& result);

}  // namespace rarefuse
