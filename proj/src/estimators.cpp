#include "rarefuse/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

const char* to_string(EstimatorKind kind) {
    return kind == EstimatorKind::MonteCarlo ? "MC" : "IS";
}

EstimatorResult monte_carlo_estimate(const Model& model, const LimitState& ls, const Density& nominal,
                                     std::size_t n, const RandomStream& stream,
                                     const SamplingOptions& options, std::string density_id) {
    if (n < 1) throw InvalidArgument("monte_carlo_estimate: n must be >= 1");
    std::vector<unsigned char> failed(n, 0);
    for_each_draw(nominal, n, stream, options, [&](std::size_t i, const Vector& z) {
        failed[i] = indicator(model, ls, z) ? 1 : 0;
    });
    std::size_t hits = 0;
    for (auto f : failed) hits += f;

    EstimatorResult r;
    r.n = n;
    r.hits = hits;
    r.estimate = static_cast<double>(hits) / static_cast<double>(n);
    r.sample_variance = (n > 1 && hits != 0 && hits != n)
                            ? static_cast<double>(n) / static_cast<double>(n - 1) * r.estimate * (1.0 - r.estimate)
                            : 0.0;
    r.density_id = std::move(density_id);
    r.kind = EstimatorKind::MonteCarlo;
    return r;
}

EstimatorResult importance_sampling_estimate(const Model& model, const LimitState& ls,
                                             const Density& nominal, const Density& biasing,
                                             std::size_t n, const RandomStream& stream,
                                             const SamplingOptions& options, std::string density_id) {
    if (n < 2) throw InvalidArgument("importance_sampling_estimate: n must be >= 2");
    if (dimension(nominal) != dimension(biasing)) {
        throw DimensionMismatch(dimension(nominal), dimension(biasing));
    }
    std::vector<double> weighted(n, 0.0);
    std::vector<unsigned char> failed(n, 0);
    for_each_draw(biasing, n, stream, options, [&](std::size_t i, const Vector& z) {
        const double log_q = log_pdf(biasing, z);
        if (log_q == -std::numeric_limits<double>::infinity()) {
            throw Error("importance_sampling_estimate: biasing density is zero at a drawn sample");
        }
        const double log_p = log_pdf(nominal, z);
        if (log_p == -std::numeric_limits<double>::infinity()) return;
        if (!indicator(model, ls, z)) return;
        failed[i] = 1;
        weighted[i] = std::exp(log_p - log_q);
    });

    EstimatorResult r;
    r.n = n;
    for (auto f : failed) r.hits += f;
    r.estimate = compensated_sum(weighted) / static_cast<double>(n);
    r.density_id = std::move(density_id);
    r.kind = EstimatorKind::ImportanceSampling;
    if (std::all_of(weighted.begin(), weighted.end(), [&](double w) { return w == weighted.front(); })) {
        r.estimate = weighted.front();
        r.sample_variance = 0.0;
        return r;
    }
    CompensatedSum squares;
    for (double w : weighted) {
        const double dev = w - r.estimate;
        squares.add(dev * dev);
    }
    r.sample_variance = squares.value() / static_cast<double>(n - 1);
    return r;
}

double rmse(const EstimatorResult& result) {
    if (result.n < 1) throw InvalidArgument("rmse: n must be >= 1");
    return std::sqrt(result.sample_variance / static_cast<double>(result.n));
}

double cv(const EstimatorResult& result) {
    if (result.n < 1) throw InvalidArgument("cv: n must be >= 1");
    if (!(result.estimate > 0.0)) throw UndefinedCv();
    return std::sqrt(result.sample_variance /
                     (static_cast<double>(result.n) * result.estimate * result.estimate));
}

double theoretical_mc_cv(double probability, std::size_t n) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw InvalidArgument("theoretical_mc_cv: probability must lie in (0, 1)");
    }
    if (n < 1) throw InvalidArgument("theoretical_mc_cv: n must be >= 1");
    return std::sqrt((1.0 - probability) / (static_cast<double>(n) * probability));
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string estimator_csv_header() {
    return "density_id,kind,n,estimate,sample_variance,hits,rmse,cv";
}

std::string estimator_csv_row(const EstimatorResult& result) {
    const double cv_value =
        result.estimate > 0.0 ? cv(result) : std::numeric_limits<double>::quiet_NaN();
    return result.density_id + "," + to_string(result.kind) + "," + std::to_string(result.n) + "," +
           format_double(result.estimate) + "," + format_double(result.sample_variance) + "," +
           std::to_string(result.hits) + "," + format_double(rmse(result)) + "," +
           format_double(cv_value);
}

}  // namespace rarefuse
