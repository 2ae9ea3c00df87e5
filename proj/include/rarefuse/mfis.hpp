#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rarefuse/densities.hpp"
#include "rarefuse/models.hpp"
#include "rarefuse/rng.hpp"
#include "rarefuse/sampling.hpp"

namespace rarefuse {

struct BiasingBuildReport {
    std::string source;                // model name the failure set came from
    std::size_t samples_drawn = 0;     // m
    std::size_t failures_found = 0;    // size of the (relaxed) failure set
    bool fell_back_to_nominal = true;
    Density density;
    double threshold_used = 0.0;       // failure when g(y) < threshold_used
    std::vector<Vector> failure_samples;  // in draw order
};

struct BiasingOptions {
    /// Failure for density construction becomes g(y) < threshold_relax
    /// (>= 0). Estimators always use the true limit state.
    std::optional<double> threshold_relax;
    double regularization = kDefaultRegularization;
    SamplingOptions sampling;
};

/// Draws m nominal samples, evaluates the surrogate, and fits a single
/// Gaussian to the points in the (relaxed) failure set. Fewer than d + 2
/// failures, or a degenerate failure set, returns the nominal density with
/// fell_back_to_nominal = true.
[[nodiscard]] BiasingBuildReport build_biasing_density(const Model& surrogate, const LimitState& ls,
                                                       const Density& nominal, std::size_t m,
                                                       const RandomStream& stream,
                                                       const BiasingOptions& options = {});

/// Report fields plus the density; failure samples are omitted.
[[nodiscard]] nlohmann::json to_json(const BiasingBuildReport& report);

}  // namespace rarefuse
