#include "rarefuse/subset_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rarefuse/errors.hpp"
#include "rarefuse/estimators.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

namespace {

constexpr std::size_t kLevelBlock = 256;

struct Level {
    std::vector<Vector> unit;
    std::vector<double> values;
    // Chain boundaries: chain c covers [offsets[c], offsets[c + 1]).
    std::vector<std::size_t> offsets;
};

std::vector<std::vector<unsigned char>> chain_indicators(const Level& level, double threshold,
                                                         bool strict) {
    std::vector<std::vector<unsigned char>> chains;
    chains.reserve(level.offsets.size() - 1);
    for (std::size_t c = 0; c + 1 < level.offsets.size(); ++c) {
        std::vector<unsigned char> ind;
        for (std::size_t t = level.offsets[c]; t < level.offsets[c + 1]; ++t) {
            const double v = level.values[t];
            ind.push_back(strict ? (v < threshold) : (v <= threshold));
        }
        chains.push_back(std::move(ind));
    }
    return chains;
}

}  // namespace

UnitPerformance unit_cube_performance(const Model& model, const LimitState& ls, const Density& nominal) {
    if (!has_unit_cube_transform(nominal)) {
        throw InvalidArgument("subset simulation needs a uniform box or single Gaussian nominal");
    }
    if (model.input_dim != dimension(nominal)) throw DimensionMismatch(dimension(nominal), model.input_dim);
    return [model, ls, nominal](const Vector& u) {
        return limit_state_value(model, ls, from_unit_cube(nominal, u));
    };
}

double reflect_unit(double x) {
    double r = std::fmod(x, 2.0);
    if (r < 0.0) r += 2.0;
    return r > 1.0 ? 2.0 - r : r;
}

MetropolisOutcome mcmc_conditional_step(const ChainState& current, double threshold,
                                        const UnitPerformance& performance, double proposal_width,
                                        Generator& gen) {
    if (!(proposal_width >= 0.0)) throw InvalidArgument("proposal_width must be >= 0");
    if (proposal_width == 0.0) return {current, false};
    std::uniform_real_distribution<double> step(-proposal_width, proposal_width);
    Vector candidate(current.u.size());
    for (Eigen::Index i = 0; i < candidate.size(); ++i) {
        candidate[i] = reflect_unit(current.u[i] + step(gen));
    }
    const double value = performance(candidate);
    if (value <= threshold) return {ChainState{std::move(candidate), value}, true};
    return {current, false};
}

double chain_correlation_factor(const std::vector<std::vector<unsigned char>>& chains, double p) {
    const double r0 = p * (1.0 - p);
    if (chains.empty() || !(r0 > 0.0)) return 0.0;
    std::size_t total = 0;
    for (const auto& c : chains) total += c.size();
    const std::size_t count = chains.size();
    const std::size_t length = total / count;
    double gamma = 0.0;
    for (std::size_t lag = 1; lag < length; ++lag) {
        std::size_t pairs = 0;
        std::size_t joint = 0;
        for (const auto& c : chains) {
            for (std::size_t t = 0; t + lag < c.size(); ++t) {
                ++pairs;
                joint += c[t] & c[t + lag];
            }
        }
        if (pairs == 0) break;
        const double r = static_cast<double>(joint) / static_cast<double>(pairs) - p * p;
        gamma += (1.0 - static_cast<double>(lag * count) / static_cast<double>(total)) * (r / r0);
    }
    return 2.0 * gamma;
}

SubsetResult subset_simulation(const Model& model, const LimitState& ls, const Density& nominal,
                               const SubsetOptions& options, const RandomStream& stream) {
    const std::size_t n = options.samples_per_level;
    if (n < 100) throw InvalidArgument("subset_simulation: samples_per_level must be >= 100");
    if (!(options.p0 > 0.0 && options.p0 < 1.0)) throw InvalidArgument("subset_simulation: p0 must lie in (0, 1)");
    if (options.max_levels < 1) throw InvalidArgument("subset_simulation: max_levels must be >= 1");
    const auto performance = unit_cube_performance(model, ls, nominal);
    const auto d = static_cast<Eigen::Index>(dimension(nominal));
    const auto quantile_rank = static_cast<std::size_t>(std::ceil(options.p0 * static_cast<double>(n) - 1e-9));

    SubsetResult result;
    result.samples_per_level = n;
    result.p0 = options.p0;

    // Level 1: i.i.d. draws in the unit hypercube.
    Level level;
    level.unit.resize(n);
    level.values.resize(n);
    const std::size_t blocks = (n + kLevelBlock - 1) / kLevelBlock;
    parallel_for(blocks, options.workers, [&](std::size_t b) {
        auto gen = stream.child(0).child(b).generator();
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (std::size_t i = b * kLevelBlock; i < std::min(n, (b + 1) * kLevelBlock); ++i) {
            Vector u(d);
            for (Eigen::Index c = 0; c < d; ++c) u[c] = uniform(gen);
            level.values[i] = performance(u);
            level.unit[i] = std::move(u);
        }
    });
    level.offsets.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) level.offsets[i] = i;
    result.total_model_evals = n;
    std::size_t seeds_at_level = n;

    double cv_squared = 0.0;
    for (std::size_t j = 1;; ++j) {
        std::vector<double> sorted = level.values;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(quantile_rank - 1), sorted.end());
        const double quantile = sorted[quantile_rank - 1];

        LevelRecord record;
        record.seeds = seeds_at_level;
        const bool final_level = quantile <= 0.0;
        const bool stalled = !result.thresholds.empty() && !(quantile < result.thresholds.back());
        const bool out_of_levels = j >= options.max_levels;

        if (final_level || stalled || out_of_levels) {
            const auto hits = static_cast<std::size_t>(
                std::count_if(level.values.begin(), level.values.end(), [](double v) { return v < 0.0; }));
            const double fraction = static_cast<double>(hits) / static_cast<double>(n);
            record.threshold = final_level ? 0.0 : quantile;
            record.conditional_probability = fraction;
            record.gamma = j == 1 ? 0.0 : chain_correlation_factor(chain_indicators(level, 0.0, true), fraction);
            record.delta_squared = fraction > 0.0
                                       ? (1.0 - fraction) / (static_cast<double>(n) * fraction) * (1.0 + record.gamma)
                                       : std::numeric_limits<double>::infinity();
            result.thresholds.push_back(record.threshold);
            result.levels = j;
            result.final_hits = hits;
            result.converged = final_level;
            result.estimate = std::pow(options.p0, static_cast<double>(j - 1)) * fraction;
            cv_squared += record.delta_squared;
            if (options.keep_levels) {
                record.unit_samples = std::move(level.unit);
                record.values = std::move(level.values);
            }
            result.level_records.push_back(std::move(record));
            break;
        }

        // Intermediate level: every sample with value <= b_j seeds a chain.
        record.threshold = quantile;
        record.conditional_probability = options.p0;
        record.gamma = j == 1 ? 0.0 : chain_correlation_factor(chain_indicators(level, quantile, false), options.p0);
        record.delta_squared =
            (1.0 - options.p0) / (static_cast<double>(n) * options.p0) * (1.0 + record.gamma);
        cv_squared += record.delta_squared;
        result.thresholds.push_back(quantile);

        std::vector<std::size_t> seeds;
        for (std::size_t i = 0; i < n; ++i) {
            if (level.values[i] <= quantile) seeds.push_back(i);
        }
        const std::size_t chains = seeds.size();
        std::vector<std::size_t> offsets(chains + 1, 0);
        for (std::size_t c = 0; c < chains; ++c) {
            offsets[c + 1] = offsets[c] + n / chains + (c < n % chains ? 1 : 0);
        }

        Level next;
        next.unit.resize(n);
        next.values.resize(n);
        next.offsets = offsets;
        parallel_for(chains, options.workers, [&](std::size_t c) {
            auto gen = stream.child(j).child(c).generator();
            ChainState state{level.unit[seeds[c]], level.values[seeds[c]]};
            next.unit[offsets[c]] = state.u;
            next.values[offsets[c]] = state.value;
            for (std::size_t t = offsets[c] + 1; t < offsets[c + 1]; ++t) {
                state = mcmc_conditional_step(state, quantile, performance, options.proposal_width, gen).state;
                next.unit[t] = state.u;
                next.values[t] = state.value;
            }
        });
        result.total_model_evals += n - chains;

        if (options.keep_levels) {
            record.unit_samples = std::move(level.unit);
            record.values = std::move(level.values);
        }
        result.level_records.push_back(std::move(record));
        level = std::move(next);
        seeds_at_level = chains;
    }

    result.approx_cv = std::sqrt(cv_squared);
    return result;
}

std::string subset_csv_header() { return "samples,samples_each_level,levels,failure_prob,estimated_cov"; }

std::string subset_csv_row(const SubsetResult& result) {
    return std::to_string(result.total_model_evals) + "," + std::to_string(result.samples_per_level) + "," +
           std::to_string(result.levels) + "," + format_double(result.estimate) + "," +
           format_double(result.approx_cv);
}

nlohmann::json to_json(const SubsetResult& result) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& r : result.level_records) {
        levels.push_back({{"threshold", r.threshold},
                          {"seeds", r.seeds},
                          {"conditional_probability", r.conditional_probability},
                          {"gamma", r.gamma},
                          {"delta_squared", r.delta_squared}});
    }
    return {{"estimate", result.estimate},
            {"levels", result.levels},
            {"thresholds", result.thresholds},
            {"samples_per_level", result.samples_per_level},
            {"total_model_evals", result.total_model_evals},
            {"approx_cv", result.approx_cv},
            {"p0", result.p0},
            {"converged", result.converged},
            {"final_hits", result.final_hits},
            {"level_records", levels}};
}

}  // namespace rarefuse
