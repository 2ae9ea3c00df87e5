#include "rarefuse/mfis.hpp"

#include <cmath>

#include "rarefuse/errors.hpp"

namespace rarefuse {

BiasingBuildReport build_biasing_density(const Model& surrogate, const LimitState& ls,
                                         const Density& nominal, std::size_t m,
                                         const RandomStream& stream, const BiasingOptions& options) {
    const double threshold = options.threshold_relax.value_or(0.0);
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw InvalidArgument("build_biasing_density: threshold_relax must be finite and >= 0");
    }
    if (surrogate.input_dim != dimension(nominal)) {
        throw DimensionMismatch(dimension(nominal), surrogate.input_dim);
    }

    BiasingBuildReport report{surrogate.name, m, 0, true, nominal, threshold, {}};

    std::vector<unsigned char> failed(m, 0);
    std::vector<Vector> points(m);
    for_each_draw(nominal, m, stream, options.sampling, [&](std::size_t i, const Vector& z) {
        if (indicator(surrogate, ls, z, threshold)) {
            failed[i] = 1;
            points[i] = z;
        }
    });
    for (std::size_t i = 0; i < m; ++i) {
        if (failed[i]) report.failure_samples.push_back(std::move(points[i]));
    }
    report.failures_found = report.failure_samples.size();

    if (report.failures_found < min_fit_samples(dimension(nominal))) return report;
    try {
        report.density = fit_gaussian(report.failure_samples, options.regularization);
        report.fell_back_to_nominal = false;
    } catch (const InsufficientSamples&) {
        report.density = nominal;
    }
    return report;
}

nlohmann::json to_json(const BiasingBuildReport& report) {
    return {{"source", report.source},
            {"samples_drawn", report.samples_drawn},
            {"failures_found", report.failures_found},
            {"fell_back_to_nominal", report.fell_back_to_nominal},
            {"threshold_used", report.threshold_used},
            {"density", to_json(report.density)}};
}

}  // namespace rarefuse
