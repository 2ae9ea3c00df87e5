#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rarefuse/benchmarks.hpp"
#include "rarefuse/estimators.hpp"
#include "rarefuse/fusion.hpp"
#include "rarefuse/mfis.hpp"
#include "rarefuse/subset_sim.hpp"

namespace rarefuse {

enum class Mode { BuildDensities, Convergence, Fuse, Subset, All };

[[nodiscard]] const char* to_string(Mode mode);

struct SubsetConfig {
    std::size_t N = 2000;
    double p0 = 0.1;
    std::size_t max_levels = 20;
};

/// Experiment description, read from a flat JSON file.
///
/// Recognised keys: benchmark, benchmark_options {beta, dim, threshold},
/// mode, m, n_grid, split ("equal" or per-density fractions), seed,
/// repetitions, output_dir, threshold_relax, subset {N, p0, max_levels},
/// workers, reference, mc_baseline. Any other key is rejected.
struct ExperimentConfig {
    std::string benchmark;
    BenchmarkOptions benchmark_options;
    Mode mode = Mode::All;
    std::size_t m = 20000;
    std::vector<std::size_t> n_grid;
    std::vector<double> split;  // empty: equal split
    std::uint64_t seed = 0;
    std::size_t repetitions = 1;
    std::string output_dir = "rarefuse-out";
    std::optional<double> threshold_relax;
    SubsetConfig subset;
    unsigned workers = 1;
    bool reference = true;
    bool mc_baseline = false;
};

/// Throws ConfigError with a readable message.
[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical JSON of the result-relevant fields
/// (output_dir and workers excluded), as 16 hex digits.
[[nodiscard]] std::string config_hash(const ExperimentConfig& config);

/// floor(n/k) each with the remainder to the first densities, or the given
/// fractions (normalised, floored, remainder to the first densities).
[[nodiscard]] std::vector<std::size_t> split_budget(std::size_t n, std::size_t k,
                                                    std::span<const double> fractions = {});

struct EstimateRow {
    std::size_t repetition = 0;
    std::size_t n_total = 0;
    std::string status;  // ok | insufficient
    EstimatorResult result;
};

struct WeightRow {
    std::size_t repetition = 0;
    std::size_t n_total = 0;
    Vector weights;
    double estimate = 0.0;
    double variance = 0.0;
    bool no_information = false;
};

struct ConvergenceRow {
    std::size_t n = 0;
    std::string estimator_id;
    double estimate = 0.0;
    double rmse = 0.0;
    double cv = 0.0;
    std::size_t repetitions = 0;  // repetitions with a defined CV
    std::string status;           // ok | insufficient | undefined_cv
};

struct ComparisonRow {
    std::size_t repetition = 0;
    std::size_t n_total = 0;
    std::string candidate;
    double candidate_sample_variance = 0.0;
    bool dominance = false;
    double fused_variance = 0.0;
    double candidate_variance = 0.0;
};

struct SubsetRow {
    std::size_t repetition = 0;
    SubsetResult result;
};

struct PhaseTiming {
    std::string phase;
    double seconds = 0.0;
    std::size_t high_fidelity_evaluations = 0;
    std::size_t surrogate_evaluations = 0;
};

struct CampaignReport {
    ExperimentConfig config;
    std::string config_hash;
    std::string benchmark_name;
    std::vector<std::string> density_ids;
    std::vector<BiasingBuildReport> densities;
    std::optional<BiasingBuildReport> reference_density;
    std::vector<EstimateRow> estimates;
    std::vector<WeightRow> weights;
    std::vector<ConvergenceRow> convergence;
    std::vector<ComparisonRow> comparisons;
    std::vector<SubsetRow> subset;
    std::vector<PhaseTiming> timings;
    /// Nominal high-fidelity sample budget per repetition, keyed by n.
    std::vector<std::pair<std::size_t, std::size_t>> budget_per_repetition;
};

/// Runs the configured phases on the named benchmark.
[[nodiscard]] CampaignReport run_experiment(const ExperimentConfig& config);
/// Same, on a caller-supplied benchmark (config.benchmark is ignored).
[[nodiscard]] CampaignReport run_experiment(const ExperimentConfig& config, const Benchmark& benchmark);

/// Rows of (n, estimator_id, estimate, rmse, cv) averaged over repetitions.
[[nodiscard]] std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& config);

[[nodiscard]] std::string estimates_csv(const CampaignReport& report);
[[nodiscard]] std::string weights_csv(const CampaignReport& report);
[[nodiscard]] std::string convergence_csv(const CampaignReport& report);
[[nodiscard]] std::string subset_csv(const CampaignReport& report);
[[nodiscard]] nlohmann::json densities_json(const CampaignReport& report);
[[nodiscard]] nlohmann::json report_json(const CampaignReport& report);

/// Writes densities.json, estimates.csv, weights.csv, convergence.csv,
/// subset.csv and report.json (only the files the mode produces).
void write_outputs(const CampaignReport& report, const std::filesystem::path& directory);

}  // namespace rarefuse
