#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rarefuse/densities.hpp"
#include "rarefuse/models.hpp"
#include "rarefuse/rng.hpp"

namespace rarefuse {

struct SubsetOptions {
    std::size_t samples_per_level = 1000;  // N
    double p0 = 0.1;
    std::size_t max_levels = 20;
    double proposal_width = 0.5;
    unsigned workers = 1;
    /// Keep every level's unit-cube samples and limit-state values.
    bool keep_levels = false;
};

struct LevelRecord {
    /// b_j; 0 at a converged final level.
    double threshold = 0.0;
    /// Number of seeds this level's chains started from (N at level 1).
    std::size_t seeds = 0;
    /// p_j used in the CV approximation (p0, or hits/N at the final level).
    double conditional_probability = 0.0;
    double gamma = 0.0;
    double delta_squared = 0.0;
    std::vector<Vector> unit_samples;
    std::vector<double> values;
};

struct SubsetResult {
    double estimate = 0.0;
    std::size_t levels = 0;                 // L
    std::vector<double> thresholds;         // b_1 > ... > b_L
    std::size_t samples_per_level = 0;      // N
    std::size_t total_model_evals = 0;
    double approx_cv = 0.0;
    double p0 = 0.0;
    bool converged = false;
    std::size_t final_hits = 0;
    std::vector<LevelRecord> level_records;
};

/// A chain point in the unit hypercube with its limit-state value.
struct ChainState {
    Vector u;
    double value = 0.0;
};

struct MetropolisOutcome {
    ChainState state;
    bool accepted = false;
};

/// g(f(T(u))) where T maps the unit hypercube onto the nominal density.
using UnitPerformance = std::function<double(const Vector&)>;

[[nodiscard]] UnitPerformance unit_cube_performance(const Model& model, const LimitState& ls,
                                                    const Density& nominal);

/// Reflects x into [0, 1] (triangle-wave fold).
[[nodiscard]] double reflect_unit(double x);

/// One component-wise modified Metropolis step in the unit hypercube.
///
/// Every coordinate is proposed from a uniform window of half-width
/// proposal_width, reflected at 0 and 1; the nominal ratio is 1 in the
/// transformed space, so coordinates are always accepted. The composite
/// candidate is kept iff its value is <= threshold, otherwise the current
/// state is repeated.
[[nodiscard]] MetropolisOutcome mcmc_conditional_step(const ChainState& current, double threshold,
                                                      const UnitPerformance& performance,
                                                      double proposal_width, Generator& gen);

/// Chain correlation factor for one level:
///
///   gamma = 2 * sum_{k=1}^{Ns-1} (1 - k Nc / N) rho(k),   rho(k) = R(k) / R(0)
///   R(k)  = mean over within-chain pairs (t, t+k) of I_t I_{t+k} - p^2
///   R(0)  = p (1 - p)
///
/// where `chains` holds each chain's indicator sequence, Nc its count,
/// N the total length and Ns = floor(N / Nc). Returns 0 when R(0) = 0.
[[nodiscard]] double chain_correlation_factor(const std::vector<std::vector<unsigned char>>& chains,
                                              double p);

/// Adaptive-level subset simulation. The result is flagged
/// converged = false when max_levels is reached with b_j > 0 or the levels
/// stop decreasing.
[[nodiscard]] SubsetResult subset_simulation(const Model& model, const LimitState& ls,
                                             const Density& nominal, const SubsetOptions& options,
                                             const RandomStream& stream);

/// samples,samples_each_level,levels,failure_prob,estimated_cov
[[nodiscard]] std::string subset_csv_header();
[[nodiscard]] std::string subset_csv_row(const SubsetResult& result);

[[nodiscard]] nlohmann::json to_json(const SubsetResult& result);

}  // namespace rarefuse
